#ifndef RINGLOC_COMMON_GRID3_HPP
#define RINGLOC_COMMON_GRID3_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace ringloc {

/// Dense rows x cols x channels array of doubles, stored channel-major so
/// each channel is a contiguous row-major image.
class Grid3 {
 public:
  Grid3() = default;
  Grid3(std::size_t rows, std::size_t cols, std::size_t channels, double fill = 0.0)
      : rows_(rows), cols_(cols), channels_(channels), data_(rows * cols * channels, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool same_shape(const Grid3& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_ && channels_ == other.channels_;
  }

  double& at(std::size_t r, std::size_t c, std::size_t ch) {
    return data_[(ch * rows_ + r) * cols_ + c];
  }
  double at(std::size_t r, std::size_t c, std::size_t ch) const {
    return data_[(ch * rows_ + r) * cols_ + c];
  }

  std::span<double> channel(std::size_t ch) {
    return {data_.data() + ch * rows_ * cols_, rows_ * cols_};
  }
  std::span<const double> channel(std::size_t ch) const {
    return {data_.data() + ch * rows_ * cols_, rows_ * cols_};
  }
  std::span<double> row(std::size_t r, std::size_t ch) {
    return {data_.data() + (ch * rows_ + r) * cols_, cols_};
  }
  std::span<const double> row(std::size_t r, std::size_t ch) const {
    return {data_.data() + (ch * rows_ + r) * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const Grid3&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

}  // namespace ringloc

#endif  // RINGLOC_COMMON_GRID3_HPP
