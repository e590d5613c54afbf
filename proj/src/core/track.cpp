#include "track.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "error.hpp"
#include "fft.hpp"

namespace kp2 {

namespace {

template <class F>
std::vector<double> spectral_map(const std::vector<double>& row, double ly, F symbol) {
  const std::size_t n = row.size();
  if (n < 2 || n % 2 != 0) throw InvalidArgument("periodic row must have even length >= 2");
  if (!(ly > 0.0)) throw InvalidArgument("period must be positive");
  RealFft1D fft(n);
  std::vector<cplx> c(n / 2 + 1);
  fft.forward(row, c);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double eta = 2.0 * std::numbers::pi * static_cast<double>(k) / ly;
    c[k] *= symbol(k, eta, k == n / 2);
  }
  std::vector<double> out(n);
  fft.inverse(c, out);
  return out;
}

}  // namespace

std::vector<double> band_limit(const std::vector<double>& row, double ly, double eta0) {
  return spectral_map(row, ly, [eta0](std::size_t, double eta, bool) { return cplx(eta <= eta0 + 1e-12 ? 1.0 : 0.0); });
}

std::vector<double> periodic_derivative(const std::vector<double>& row, double ly) {
  return spectral_map(row, ly, [](std::size_t, double eta, bool nyq) { return nyq ? cplx{} : cplx(0.0, eta); });
}

std::vector<double> periodic_antiderivative(const std::vector<double>& row, double ly) {
  return spectral_map(row, ly, [](std::size_t k, double eta, bool nyq) {
    return (k == 0 || nyq) ? cplx{} : cplx(0.0, -1.0 / eta);
  });
}

void ModulationTrack::validate() const {
  if (!(ly > 0.0) || ny < 2) throw InvalidArgument("track grid is empty");
  if (c.size() != times.size() || x.size() != times.size()) throw InvalidArgument("track arrays differ in length");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (c[k].size() != ny || x[k].size() != ny) throw InvalidArgument("track row has wrong length");
    if (k > 0 && !(times[k] > times[k - 1])) throw InvalidArgument("track times must increase");
    for (double v : c[k]) {
      if (!(v > 0.0)) throw AmplitudeCollapse(v);
    }
  }
}

void ModulationTrack::append(double t, std::vector<double> c_row, std::vector<double> x_row) {
  if (c_row.size() != ny || x_row.size() != ny) throw InvalidArgument("track row has wrong length");
  if (!times.empty() && !(t > times.back())) throw InvalidArgument("track times must increase");
  times.push_back(t);
  c.push_back(std::move(c_row));
  x.push_back(std::move(x_row));
}

std::size_t ModulationTrack::index_of(double t) const {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return k;
  }
  throw InvalidArgument("track has no sample at t = " + std::to_string(t));
}

std::vector<double> ModulationTrack::x_y(std::size_t k) const { return periodic_derivative(x.at(k), ly); }

std::vector<double> ModulationTrack::b(std::size_t k, double eta0) const {
  std::vector<double> row(ny);
  for (std::size_t m = 0; m < ny; ++m) row[m] = std::sqrt(2.0) * std::pow(c.at(k)[m], 1.5) - 4.0;
  auto out = band_limit(row, ly, eta0);
  for (double& v : out) v /= 3.0;
  return out;
}

void write_track_csv(const std::filesystem::path& path, const ModulationTrack& track, double eta0) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string());
  os.precision(12);
  os << "t,y,c,x,xy,b\n";
  for (std::size_t k = 0; k < track.size(); ++k) {
    const auto xy = track.x_y(k);
    const auto b = track.b(k, eta0);
    for (std::size_t m = 0; m < track.ny; ++m) {
      os << track.times[k] << ',' << track.y(m) << ',' << track.c[k][m] << ',' << track.x[k][m] << ',' << xy[m] << ','
         << b[m] << '\n';
    }
  }
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace kp2
