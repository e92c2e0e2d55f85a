#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mvcolor {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using FaceId = std::uint32_t;
using ViewId = std::uint32_t;

inline constexpr FaceId kNoFace = std::numeric_limits<FaceId>::max();

// Per-channel value. Gray data uses only the first slot.
inline constexpr int kMaxChannels = 3;
using Color = std::array<double, kMaxChannels>;

// Errors map onto CLI exit codes: validation -> 1, I/O -> 2.
enum class ErrorKind { Validation, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace mvcolor
