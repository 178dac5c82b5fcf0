#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace msrs {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Axis-aligned rectangle; origin is the lower-left corner. Closed on all
// edges.
struct Region {
  double width_km = 0.0;
  double height_km = 0.0;
  Point origin{0.0, 0.0};

  bool contains(Point p) const {
    return p.x >= origin.x && p.x <= origin.x + width_km && p.y >= origin.y &&
           p.y <= origin.y + height_km;
  }
  double clamp_x(double x) const {
    return std::clamp(x, origin.x, origin.x + width_km);
  }
  double clamp_y(double y) const {
    return std::clamp(y, origin.y, origin.y + height_km);
  }
};

enum class Mode { cooperative, non_cooperative };
enum class RcsModel { deterministic, rayleigh };

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

// Invalid configuration; what() starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message) {}
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OptimizerStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace msrs
