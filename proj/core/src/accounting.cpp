#include "emod/accounting.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "emod/error.hpp"
#include "emod/runner.hpp"

namespace emod {

// ---- exact summation ------------------------------------------------------------

void ExactSum::add(double x) {
  std::size_t i = 0;
  for (double y : partials_) {
    if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
    double hi = x + y;
    double lo = y - (hi - x);
    if (lo != 0.0) partials_[i++] = lo;
    x = hi;
  }
  partials_.resize(i);
  partials_.push_back(x);
}

void ExactSum::add_product(double a, double b) {
  double p = a * b;
  double err = std::fma(a, b, -p);
  add(p);
  if (err != 0.0) add(err);
}

void ExactSum::merge(const ExactSum& other) {
  for (double p : other.partials_) add(p);
}

double ExactSum::value() const {
  std::size_t n = partials_.size();
  if (n == 0) return 0.0;
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    double x = hi;
    double y = partials_[--n];
    hi = x + y;
    double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0 && partials_[n - 1] < 0) || (lo > 0 && partials_[n - 1] > 0))) {
    double y = lo * 2.0;
    double x = hi + y;
    double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

// ---- ranking ----------------------------------------------------------------------

OpRanking rank_operations(const CostModel& model, const std::vector<double>& counts, int k) {
  const std::size_t l = model.cost_j.size();
  if (counts.size() != l)
    throw DimensionError("ranking: " + std::to_string(counts.size()) + " counts for " + std::to_string(l) + " costs");
  if (k < 0 || static_cast<std::size_t>(k) > l)
    throw DimensionError("top-k of " + std::to_string(k) + " exceeds the " + std::to_string(l) + " operations");
  OpRanking r;
  r.k = k;
  ExactSum total;
  for (std::size_t j = 0; j < l; ++j) {
    OpRow row;
    row.id = j < model.op_ids.size() ? model.op_ids[j] : std::to_string(j);
    row.cls = classify(row.id);
    row.unit_cost_j = model.cost_j[j];
    row.executions = counts[j];
    row.total_j = row.unit_cost_j * row.executions;
    total.add_product(row.unit_cost_j, row.executions);
    r.rows.push_back(std::move(row));
  }
  r.total_j = total.value();
  std::stable_sort(r.rows.begin(), r.rows.end(), [](const OpRow& a, const OpRow& b) {
    if (a.unit_cost_j != b.unit_cost_j) return a.unit_cost_j > b.unit_cost_j;
    return a.id < b.id;
  });
  ExactSum top;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    OpRow& row = r.rows[i];
    row.rank = static_cast<int>(i) + 1;
    row.share = r.total_j != 0.0 ? row.total_j / r.total_j : 0.0;
    if (static_cast<int>(i) < k) top.add_product(row.unit_cost_j, row.executions);
  }
  r.top_k_share = r.total_j != 0.0 ? top.value() / r.total_j : 0.0;
  return r;
}

// ---- block view -------------------------------------------------------------------

namespace {

std::vector<double> costs_for(const CostModel& model, const std::vector<std::string>& ids,
                              const std::map<std::string, double>& overrides = {}) {
  std::unordered_map<std::string, double> by_id;
  for (std::size_t j = 0; j < model.cost_j.size() && j < model.op_ids.size(); ++j)
    by_id.emplace(model.op_ids[j], model.cost_j[j]);
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it != by_id.end()) {
      out.push_back(it->second);
      continue;
    }
    auto ov = overrides.find(id);
    if (ov == overrides.end()) throw DimensionError("cost model has no cost for operation '" + id + "'");
    out.push_back(ov->second);
  }
  return out;
}

void check_log(const OpDictionary& dict, const BlockLog& log) {
  if (static_cast<int>(log.counts.size()) != dict.num_blocks)
    throw DimensionError("block log has " + std::to_string(log.counts.size()) + " entries for " +
                         std::to_string(dict.num_blocks) + " blocks");
}

}  // namespace

BlockBreakdown block_breakdown(const CostModel& model, const Program& program, const BlockTable& table,
                               const OpDictionary& dict, const BlockLog& log) {
  check_log(dict, log);
  if (table.size() != dict.num_blocks) throw DimensionError("block table and dictionary disagree on block count");
  std::vector<double> cost = costs_for(model, dict.op_ids());
  BlockBreakdown out;
  ExactSum total;
  for (int i = 0; i < dict.num_blocks; ++i) {
    BlockRow row;
    row.id = i;
    row.method = program.methods[table.blocks[i].method].qualified_name();
    row.kind = table.blocks[i].kind;
    row.executions = log.counts[i];
    ExactSum single, in_app;
    std::array<ExactSum, kNumOpClasses> by_class;
    for (int j = 0; j < dict.num_ops(); ++j) {
      std::int64_t o = dict.at(i, j);
      if (o == 0) continue;
      single.add_product(static_cast<double>(o), cost[j]);
      in_app.add_product(static_cast<double>(o * log.counts[i]), cost[j]);
      by_class[static_cast<std::size_t>(dict.ops[j].cls)].add_product(static_cast<double>(o), cost[j]);
    }
    row.single_j = single.value();
    row.in_app_j = in_app.value();
    row.per3000_j = 3000.0 * row.single_j;
    for (std::size_t c = 0; c < kNumOpClasses; ++c)
      row.class_share[c] = row.single_j != 0.0 ? 100.0 * by_class[c].value() / row.single_j : 0.0;
    total.merge(in_app);
    out.rows.push_back(std::move(row));
  }
  out.total_j = total.value();
  return out;
}

bool Conservation::bit_identical() const {
  return std::memcmp(&op_view_j, &block_view_j, sizeof(double)) == 0 &&
         std::memcmp(&op_view_j, &dot_j, sizeof(double)) == 0;
}

Conservation check_conservation(const CostModel& model, const OpDictionary& dict, const BlockLog& log) {
  check_log(dict, log);
  std::vector<double> cost = costs_for(model, dict.op_ids());
  std::vector<std::int64_t> n = case_op_counts(dict, log);

  Conservation c;
  ExactSum op_view;
  for (int j = 0; j < dict.num_ops(); ++j) {
    ExactSum column;
    column.add_product(cost[j], static_cast<double>(n[j]));
    op_view.merge(column);
  }
  c.op_view_j = op_view.value();

  ExactSum block_view;
  for (int i = 0; i < dict.num_blocks; ++i) {
    ExactSum block;
    for (int j = 0; j < dict.num_ops(); ++j) {
      std::int64_t o = dict.at(i, j);
      if (o != 0) block.add_product(static_cast<double>(o * log.counts[i]), cost[j]);
    }
    block_view.merge(block);
  }
  c.block_view_j = block_view.value();

  ExactSum dot;
  for (int j = 0; j < dict.num_ops(); ++j) dot.add_product(static_cast<double>(n[j]), cost[j]);
  c.dot_j = dot.value();
  return c;
}

// ---- variants -----------------------------------------------------------------------

std::vector<VariantRow> compare_variants(const CostModel& model, const std::vector<VariantInput>& variants,
                                         const ExecutionCase& c, const std::map<std::string, double>& overrides) {
  std::vector<VariantRow> rows;
  for (const auto& v : variants) {
    if (!v.program) throw DimensionError("variant '" + v.name + "' has no program");
    BlockTable table = divide_blocks(*v.program);
    OpDictionary dict = build_dictionary(*v.program, table);
    ExecutionCase plain = c;
    plain.removed.clear();
    RunResult r = run(*v.program, table, dict.op_ids(), plain);
    std::vector<std::int64_t> n = case_op_counts(dict, r.log);
    std::vector<double> cost = costs_for(model, dict.op_ids(), overrides);
    VariantRow row;
    row.name = v.name;
    ExactSum e;
    for (int j = 0; j < dict.num_ops(); ++j) {
      e.add_product(static_cast<double>(n[j]), cost[j]);
      row.counts[dict.ops[j].id] = n[j];
    }
    row.energy_j = e.value();
    rows.push_back(std::move(row));
  }
  if (!rows.empty() && rows.front().energy_j != 0.0)
    for (auto& r : rows) r.change_pct = 100.0 * (r.energy_j - rows.front().energy_j) / rows.front().energy_j;
  return rows;
}

// ---- tables ---------------------------------------------------------------------------

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string ranking_to_csv(const OpRanking& r) {
  std::ostringstream out;
  out.precision(12);
  out << "rank,op,class,unit_cost_j,executions,total_j,share\n";
  for (const auto& row : r.rows)
    out << row.rank << ',' << csv_escape(row.id) << ',' << class_label(row.cls) << ',' << row.unit_cost_j << ','
        << row.executions << ',' << row.total_j << ',' << row.share << '\n';
  return out.str();
}

std::string blocks_breakdown_to_csv(const BlockBreakdown& b) {
  std::ostringstream out;
  out.precision(12);
  out << "block,method,kind,executions,in_app_j,single_j,per3000_j";
  for (OpClass c : kAllOpClasses) out << ',' << csv_escape(class_label(c));
  out << '\n';
  for (const auto& row : b.rows) {
    out << row.id << ',' << row.method << ',' << to_string(row.kind) << ',' << row.executions << ',' << row.in_app_j
        << ',' << row.single_j << ',' << row.per3000_j;
    for (double s : row.class_share) out << ',' << s;
    out << '\n';
  }
  return out.str();
}

std::string variants_to_csv(const std::vector<VariantRow>& rows) {
  std::ostringstream out;
  out.precision(12);
  out << "variant,energy_j,change_pct\n";
  for (const auto& r : rows) out << csv_escape(r.name) << ',' << r.energy_j << ',' << r.change_pct << '\n';
  return out.str();
}

// ---- SVG ------------------------------------------------------------------------------

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

constexpr std::array<const char*, kNumOpClasses> kPalette = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                                             "#59a14f", "#edc948", "#b07aa1", "#9c755f"};

}  // namespace

std::string svg_bar_chart(const std::string& title, const std::vector<BarSeries>& bars, const std::string& unit) {
  const int label_w = 220, bar_w = 420, row_h = 18, top = 40;
  const int height = top + static_cast<int>(bars.size()) * row_h + 20;
  double max_v = 0.0;
  for (const auto& b : bars) max_v = std::max(max_v, b.value);
  std::ostringstream out;
  out.precision(4);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << label_w + bar_w + 120 << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<text x=\"10\" y=\"22\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    int y = top + static_cast<int>(i) * row_h;
    double w = max_v > 0 ? bar_w * bars[i].value / max_v : 0.0;
    out << "<text x=\"" << label_w - 6 << "\" y=\"" << y + 12 << "\" text-anchor=\"end\">"
        << xml_escape(bars[i].label) << "</text>";
    out << "<rect x=\"" << label_w << "\" y=\"" << y + 2 << "\" width=\"" << std::max(0.0, w) << "\" height=\""
        << row_h - 4 << "\" fill=\"" << kPalette[0] << "\"/>";
    out << "<text x=\"" << label_w + std::max(0.0, w) + 4 << "\" y=\"" << y + 12 << "\">" << bars[i].value << ' '
        << xml_escape(unit) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_class_chart(const std::string& title, const std::vector<std::string>& labels,
                            const std::vector<std::array<double, kNumOpClasses>>& shares) {
  const int label_w = 160, bar_w = 480, row_h = 18, top = 60;
  const int height = top + static_cast<int>(labels.size()) * row_h + 20;
  std::ostringstream out;
  out.precision(4);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << label_w + bar_w + 20 << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<text x=\"10\" y=\"22\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  for (std::size_t c = 0; c < kNumOpClasses; ++c) {
    int x = 10 + static_cast<int>(c % 4) * 160;
    int y = 32 + static_cast<int>(c / 4) * 14;
    out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[c] << "\"/>";
    out << "<text x=\"" << x + 14 << "\" y=\"" << y + 9 << "\">" << class_label(kAllOpClasses[c]) << "</text>\n";
  }
  for (std::size_t i = 0; i < labels.size() && i < shares.size(); ++i) {
    int y = top + static_cast<int>(i) * row_h;
    out << "<text x=\"" << label_w - 6 << "\" y=\"" << y + 12 << "\" text-anchor=\"end\">" << xml_escape(labels[i])
        << "</text>";
    double x = label_w;
    for (std::size_t c = 0; c < kNumOpClasses; ++c) {
      double w = bar_w * shares[i][c] / 100.0;
      if (w <= 0) continue;
      out << "<rect x=\"" << x << "\" y=\"" << y + 2 << "\" width=\"" << w << "\" height=\"" << row_h - 4
          << "\" fill=\"" << kPalette[c] << "\"/>";
      x += w;
    }
    out << '\n';
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace emod
