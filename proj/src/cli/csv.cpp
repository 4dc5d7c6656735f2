#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lrvec/errors.hpp"

namespace lrvec::cli {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Sample read_population(const std::string& path, const Model& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  const std::size_t d = model.observation_dim();

  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  Sample sample(d);
  std::vector<double> row(d);
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = trim(view);
    if (view.empty()) continue;
    const auto fields = split(view);
    const std::string where = path + ":" + std::to_string(line_no);
    if (!have_header) {
      if (fields.size() != d) {
        throw InputError(where + ": header has " + std::to_string(fields.size()) +
                         " columns, model " + model.name() + " expects " + std::to_string(d));
      }
      for (std::size_t k = 0; k < d; ++k) {
        if (trim(fields[k]) != "x" + std::to_string(k + 1)) {
          throw InputError(where + ": header must be x1,...,x" + std::to_string(d));
        }
      }
      have_header = true;
      continue;
    }
    if (fields.size() != d) {
      throw InputError(where + ": expected " + std::to_string(d) + " values, found " +
                       std::to_string(fields.size()));
    }
    for (std::size_t k = 0; k < d; ++k) {
      const auto field = trim(fields[k]);
      const char* first = field.data();
      const char* last = first + field.size();
      if (!field.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, row[k]);
      if (ec != std::errc() || ptr != last || field.empty() || !std::isfinite(row[k])) {
        throw InputError(where + ": '" + std::string(field) + "' is not a finite number");
      }
    }
    try {
      model.validate(ObservationView(row));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    sample.push_back(ObservationView(row));
  }
  if (!have_header) throw InputError("data file '" + path + "' is empty");
  if (sample.empty()) throw InputError("data file '" + path + "' has no observations");
  return sample;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_population(const std::string& path, const Sample& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write data file '" + path + "'");
  for (std::size_t k = 0; k < data.dim(); ++k) out << (k ? ",x" : "x") << k + 1;
  out << '\n';
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto x = data[j];
    for (std::size_t k = 0; k < x.size(); ++k) out << (k ? "," : "") << format_double(x[k]);
    out << '\n';
  }
  if (!out) throw InputError("failed writing data file '" + path + "'");
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, double upper,
                                    std::size_t bins) {
  if (bins < 1 || !(upper > 0.0)) throw InputError("histogram needs bins >= 1 and upper > 0");
  std::vector<HistogramBin> out(bins + 1);
  const double width = upper / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].left = width * static_cast<double>(b);
    out[b].right = b + 1 == bins ? upper : width * static_cast<double>(b + 1);
  }
  out[bins].left = upper;
  out[bins].right = std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (v >= upper) {
      ++out[bins].count;
    } else {
      auto b = static_cast<std::size_t>(std::max(v, 0.0) / width);
      b = std::min(b, bins - 1);
      // Keep the bin consistent with the stored edges under rounding.
      if (v < out[b].left && b > 0) --b;
      if (v >= out[b].right && b + 1 < bins) ++b;
      ++out[b].count;
    }
  }
  return out;
}

void write_histogram(const std::string& path, const std::vector<HistogramBin>& bins) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write histogram file '" + path + "'");
  out << "bin_left,bin_right,count\n";
  for (const auto& b : bins) {
    out << format_double(b.left) << ',' << (std::isinf(b.right) ? "inf" : format_double(b.right))
        << ',' << b.count << '\n';
  }
  if (!out) throw InputError("failed writing histogram file '" + path + "'");
}

}  // namespace lrvec::cli
