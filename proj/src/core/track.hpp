#pragma once

#include <filesystem>
#include <vector>

namespace kp2 {

/// Local amplitude c(t, y) and crest position x(t, y) sampled on the periodic
/// transverse grid y_m = (m - ny/2) ly / ny. Positions are in the simulation
/// frame (moving with `frame_speed`) and unwrapped in y.
struct ModulationTrack {
  double ly = 0.0;
  std::size_t ny = 0;
  double frame_speed = 4.0;
  std::vector<double> times;
  std::vector<std::vector<double>> c, x;  // [time][y]

  double y(std::size_t m) const noexcept {
    return (static_cast<double>(m) - static_cast<double>(ny / 2)) * ly / static_cast<double>(ny);
  }
  std::size_t size() const noexcept { return times.size(); }
  /// Throws InvalidArgument on size mismatch or non-increasing times,
  /// AmplitudeCollapse when some c <= 0.
  void validate() const;
  void append(double t, std::vector<double> c_row, std::vector<double> x_row);
  /// Index of the sample at time t (within 1e-9), else InvalidArgument.
  std::size_t index_of(double t) const;

  /// Spectral y-derivative of x at sample k.
  std::vector<double> x_y(std::size_t k) const;
  /// b = (1/3) P{sqrt(2) c^{3/2} - 4}, P the sharp projection onto |eta| <= eta0.
  std::vector<double> b(std::size_t k, double eta0) const;
};

/// Sharp band limit to |eta| <= eta0 of a periodic sample row of length ly.
std::vector<double> band_limit(const std::vector<double>& row, double ly, double eta0);
/// Spectral derivative of a periodic row.
std::vector<double> periodic_derivative(const std::vector<double>& row, double ly);
/// Zero-mean spectral antiderivative of a periodic row (its mean is dropped).
std::vector<double> periodic_antiderivative(const std::vector<double>& row, double ly);

/// CSV `t,y,c,x,xy,b`.
void write_track_csv(const std::filesystem::path& path, const ModulationTrack& track, double eta0);

}  // namespace kp2
