#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "drobf/linalg.hpp"

namespace drobf {

enum class ConeKind { Zero, Nonneg, SecondOrder, Psd };

std::string to_string(ConeKind kind);

/// One block of a product cone. For Psd blocks `dim` is the svec length of
/// a `side`×`side` symmetric matrix.
struct ConeBlock {
  ConeKind kind = ConeKind::Nonneg;
  std::size_t dim = 0;
  std::size_t side = 0;

  static ConeBlock zero(std::size_t dim) { return {ConeKind::Zero, dim, 0}; }
  static ConeBlock nonneg(std::size_t dim) { return {ConeKind::Nonneg, dim, 0}; }
  static ConeBlock second_order(std::size_t dim) { return {ConeKind::SecondOrder, dim, 0}; }
  static ConeBlock psd(std::size_t side) { return {ConeKind::Psd, side * (side + 1) / 2, side}; }

  bool operator==(const ConeBlock&) const = default;
};

/// Ordered product of cone blocks.
///
/// Slack convention: a Zero block pins its slack to 0, so equality rows are
/// written as Zero blocks and their multipliers are free. `project` maps onto
/// the primal cone (Zero -> 0) and `project_dual` onto the dual cone
/// (Zero -> unchanged); all other kinds are self-dual.
class ConeSpec {
 public:
  ConeSpec() = default;
  ConeSpec(std::initializer_list<ConeBlock> blocks);

  ConeSpec& add(ConeBlock block);

  const std::vector<ConeBlock>& blocks() const { return blocks_; }
  std::size_t total_dim() const { return total_; }

  bool operator==(const ConeSpec&) const = default;

 private:
  std::vector<ConeBlock> blocks_;
  std::size_t total_ = 0;
};

void project_in_place(std::span<double> v, const ConeSpec& cone);
void project_dual_in_place(std::span<double> v, const ConeSpec& cone);
RealVector project(std::span<const double> v, const ConeSpec& cone);
RealVector project_dual(std::span<const double> v, const ConeSpec& cone);

void project_nonneg(std::span<double> v);
void project_second_order(std::span<double> v);
void project_psd(std::span<double> v);

/// Euclidean distance from v to the cone.
double distance(std::span<const double> v, const ConeSpec& cone);
double distance_dual(std::span<const double> v, const ConeSpec& cone);

}  // namespace drobf
