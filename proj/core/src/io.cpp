#include "tcomplete/io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace tcomplete {

namespace {

constexpr int kDigits = std::numeric_limits<double>::max_digits10;

template <typename T>
T read_value(std::istream& in, const char* what) {
  T value{};
  if (!(in >> value)) throw std::runtime_error(std::string("malformed input: expected ") + what);
  return value;
}

void expect_end(std::istream& in) {
  in >> std::ws;
  if (!in.eof()) throw std::runtime_error("malformed input: trailing data");
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor3& t) {
  const auto [d1, d2, d3] = t.dims();
  out << d1 << ' ' << d2 << ' ' << d3 << '\n' << std::setprecision(kDigits);
  const Index row = d3 > 0 ? d3 : 1;
  Index k = 0;
  for (const double v : t.values()) {
    out << v << (++k % row == 0 ? '\n' : ' ');
  }
}

Tensor3 read_tensor(std::istream& in) {
  Dims3 dims{};
  for (Index& d : dims) {
    d = read_value<Index>(in, "dimension");
    if (d < 1) throw std::runtime_error("malformed input: dimensions must be positive");
  }
  std::vector<double> values(static_cast<std::size_t>(volume(dims)));
  for (double& v : values) v = read_value<double>(in, "tensor value");
  expect_end(in);
  return Tensor3(dims, std::move(values));
}

void write_observations(std::ostream& out, const ObservationSet& obs) {
  const auto [d1, d2, d3] = obs.dims();
  out << d1 << ' ' << d2 << ' ' << d3 << ' ' << obs.size() << '\n' << std::setprecision(kDigits);
  for (const Sample& s : obs.samples()) {
    out << s.index[0] + 1 << ' ' << s.index[1] + 1 << ' ' << s.index[2] + 1 << ' ' << s.value
        << '\n';
  }
}

ObservationSet read_observations(std::istream& in) {
  Dims3 dims{};
  for (Index& d : dims) d = read_value<Index>(in, "dimension");
  const auto n = read_value<Index>(in, "sample count");
  if (n < 1) throw std::runtime_error("malformed input: sample count must be >= 1");
  std::vector<Sample> samples(static_cast<std::size_t>(n));
  for (Sample& s : samples) {
    for (Index& i : s.index) i = read_value<Index>(in, "index") - 1;
    s.value = read_value<double>(in, "value");
  }
  expect_end(in);
  try {
    return ObservationSet(dims, std::move(samples));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("malformed input: ") + e.what());
  }
}

Tensor3 load_tensor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_tensor(in);
}

void save_tensor(const std::string& path, const Tensor3& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_tensor(out, t);
  if (!out) throw std::runtime_error("write failed: " + path);
}

ObservationSet load_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_observations(in);
}

void save_observations(const std::string& path, const ObservationSet& obs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_observations(out, obs);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace tcomplete
