#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "emod/ast.hpp"
#include "emod/blocks.hpp"
#include "emod/opdict.hpp"
#include "emod/ops.hpp"
#include "emod/planner.hpp"
#include "emod/regress.hpp"

namespace emod {

/// Error-free accumulator: keeps non-overlapping partials and rounds once on read.
class ExactSum {
 public:
  void add(double x);
  /// Adds a·b without rounding the product.
  void add_product(double a, double b);
  void merge(const ExactSum& other);
  /// Correctly rounded value of the exact sum.
  double value() const;

 private:
  std::vector<double> partials_;
};

struct OpRow {
  int rank = 0;
  std::string id;
  OpClass cls = OpClass::Other;
  double unit_cost_j = 0.0;
  double executions = 0.0;
  double total_j = 0.0;
  double share = 0.0;  // of the op-view total
};

struct OpRanking {
  std::vector<OpRow> rows;  // unit cost, descending
  double total_j = 0.0;
  int k = 0;
  double top_k_share = 0.0;
};

/// Ranks by unit cost (ties by id). Throws DimensionError if k exceeds the op count or the
/// counts do not match the model.
OpRanking rank_operations(const CostModel& model, const std::vector<double>& counts, int k);

struct BlockRow {
  int id = 0;
  std::string method;
  BlockKind kind = BlockKind::Plain;
  std::int64_t executions = 0;
  double in_app_j = 0.0;
  double single_j = 0.0;
  double per3000_j = 0.0;
  std::array<double, kNumOpClasses> class_share{};  // percent of single_j
};

struct BlockBreakdown {
  std::vector<BlockRow> rows;
  double total_j = 0.0;
};

/// Model costs must cover every dictionary op by id.
BlockBreakdown block_breakdown(const CostModel& model, const Program& program, const BlockTable& table,
                               const OpDictionary& dict, const BlockLog& log);

/// The same predicted workload energy computed three ways.
struct Conservation {
  double op_view_j = 0.0;
  double block_view_j = 0.0;
  double dot_j = 0.0;

  bool bit_identical() const;
};

Conservation check_conservation(const CostModel& model, const OpDictionary& dict, const BlockLog& log);

struct VariantInput {
  std::string name;
  const Program* program = nullptr;
};

struct VariantRow {
  std::string name;
  double energy_j = 0.0;
  double change_pct = 0.0;  // relative to the first variant
  std::map<std::string, std::int64_t> counts;
};

/// Runs every variant under the same case and predicts its energy. Ops missing from the model
/// take their cost from `overrides`; otherwise DimensionError.
std::vector<VariantRow> compare_variants(const CostModel& model, const std::vector<VariantInput>& variants,
                                         const ExecutionCase& c,
                                         const std::map<std::string, double>& overrides = {});

std::string ranking_to_csv(const OpRanking& r);
std::string blocks_breakdown_to_csv(const BlockBreakdown& b);
std::string variants_to_csv(const std::vector<VariantRow>& rows);

struct BarSeries {
  std::string label;
  double value = 0.0;
};

/// Horizontal bar chart.
std::string svg_bar_chart(const std::string& title, const std::vector<BarSeries>& bars, const std::string& unit);
/// Horizontal 100%-stacked bars, one per label, segments in class order.
std::string svg_class_chart(const std::string& title, const std::vector<std::string>& labels,
                            const std::vector<std::array<double, kNumOpClasses>>& shares);

}  // namespace emod
