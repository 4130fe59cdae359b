#include "emod/regress.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "emod/error.hpp"
#include "emod/random.hpp"
#include "json.hpp"

namespace emod {

Assembled assemble(const std::vector<std::string>& op_ids, const std::vector<CaseCounts>& counts,
                   const std::vector<CaseEnergy>& energies) {
  if (counts.empty() || energies.empty()) throw DimensionError("cannot assemble an empty case set");
  std::map<int, const CaseCounts*> by_case;
  for (const auto& c : counts) {
    if (c.counts.size() != op_ids.size())
      throw DimensionError("case " + std::to_string(c.case_id) + " has " + std::to_string(c.counts.size()) +
                           " counts for " + std::to_string(op_ids.size()) + " operations");
    if (!by_case.emplace(c.case_id, &c).second)
      throw DimensionError("duplicate counts for case " + std::to_string(c.case_id));
  }
  std::map<int, double> energy;
  for (const auto& m : energies)
    if (!energy.emplace(m.case_id, m.e_joules).second)
      throw DimensionError("duplicate measurement for case " + std::to_string(m.case_id));
  for (const auto& [id, _] : by_case)
    if (!energy.count(id)) throw DimensionError("case " + std::to_string(id) + " has counts but no measurement");
  for (const auto& [id, _] : energy)
    if (!by_case.count(id)) throw DimensionError("case " + std::to_string(id) + " has a measurement but no counts");

  Assembled a;
  a.matrix.op_ids = op_ids;
  a.matrix.n.resize(static_cast<Eigen::Index>(by_case.size()), static_cast<Eigen::Index>(op_ids.size()));
  a.e.resize(static_cast<Eigen::Index>(by_case.size()));
  Eigen::Index i = 0;
  for (const auto& [id, c] : by_case) {
    a.matrix.case_ids.push_back(id);
    for (std::size_t j = 0; j < op_ids.size(); ++j) a.matrix.n(i, static_cast<Eigen::Index>(j)) = c->counts[j];
    a.e(i) = energy[id];
    ++i;
  }
  return a;
}

double loss(const Eigen::MatrixXd& n, const Eigen::VectorXd& cost, const Eigen::VectorXd& e) {
  if (n.cols() != cost.size() || n.rows() != e.size()) throw DimensionError("loss: dimension mismatch");
  return (n * cost - e).squaredNorm() / (2.0 * static_cast<double>(n.rows()));
}

Eigen::VectorXd gradient(const Eigen::MatrixXd& n, const Eigen::VectorXd& cost, const Eigen::VectorXd& e) {
  if (n.cols() != cost.size() || n.rows() != e.size()) throw DimensionError("gradient: dimension mismatch");
  return n.transpose() * (n * cost - e) / static_cast<double>(n.rows());
}

Eigen::VectorXd predict(const Eigen::MatrixXd& n, const Eigen::VectorXd& cost) {
  if (n.cols() != cost.size()) throw DimensionError("predict: dimension mismatch");
  return n * cost;
}

namespace {

struct Descent {
  Eigen::VectorXd w;
  long iters = 0;
  double j = 0.0;
  std::vector<double> history;
  bool diverged = false;
};

Descent descend(const Eigen::MatrixXd& x, const Eigen::VectorXd& e, Eigen::VectorXd w, const FitConfig& cfg) {
  const double m = static_cast<double>(x.rows());
  Descent out;
  Eigen::VectorXd r = x * w - e;
  double j = r.squaredNorm() / (2.0 * m);
  const double j0 = std::max(j, 1e-300);
  double alpha = cfg.alpha;
  // d: last accepted step, q = x·d. Nesterov extrapolates along d; k counts steps since a reset.
  Eigen::VectorXd d = Eigen::VectorXd::Zero(w.size());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(r.size());
  Eigen::VectorXd g(w.size()), y(w.size()), ry(r.size()), w_new(w.size()), r_new(r.size());
  out.history.push_back(j);
  long it = 0;
  long k = 0;
  int small = 0;
  const int patience = cfg.accelerate ? 20 : 1;
  for (; it < cfg.max_iters && j > 0.0; ++it) {
    double beta = cfg.accelerate ? static_cast<double>(k) / static_cast<double>(k + 3) : 0.0;
    auto look_ahead = [&] {
      y = w + beta * d;
      ry = r + beta * q;
      g.noalias() = x.transpose() * ry;
      g /= m;
    };
    look_ahead();
    bool accepted = false;
    double j_new = j;
    for (int tries = 0; tries < 200; ++tries) {
      w_new = y - alpha * g;
      if (cfg.nonneg) w_new = w_new.cwiseMax(0.0);
      r_new.noalias() = x * (w_new - w);
      r_new += r;
      j_new = r_new.squaredNorm() / (2.0 * m);
      if (!std::isfinite(j_new) || j_new > 1e12 * j0) {
        if (!cfg.backoff) {
          out.diverged = true;
          out.iters = it;
          out.j = j_new;
          out.w = w;
          return out;
        }
      } else if (!cfg.backoff || j_new <= j) {
        accepted = true;
        break;
      }
      if (beta > 0.0) {
        // Failing soon after a reset means alpha is too large for the look-ahead.
        if (k <= 100) alpha *= 0.5;
        beta = 0.0;
        k = 0;
        look_ahead();
      } else {
        alpha *= 0.5;
      }
    }
    if (!accepted) break;
    double rel = (j - j_new) / j;
    d = w_new - w;
    q = r_new - r;
    w.swap(w_new);
    r.swap(r_new);
    j = j_new;
    ++k;
    if ((it + 1) % 1000 == 0) {
      r.noalias() = x * w;
      r -= e;
      j = r.squaredNorm() / (2.0 * m);
    }
    if ((it + 1) % 100 == 0) out.history.push_back(j);
    small = rel < cfg.epsilon ? small + 1 : 0;
    if (small >= patience) {
      ++it;
      break;
    }
  }
  r.noalias() = x * w;
  r -= e;
  out.j = r.squaredNorm() / (2.0 * m);
  out.history.push_back(out.j);
  out.iters = it;
  out.w = std::move(w);
  return out;
}

}  // namespace

CostModel fit(const Eigen::MatrixXd& n, const Eigen::VectorXd& e, const FitConfig& cfg) {
  if (n.rows() < 1 || n.cols() < 1) throw FitError("fit needs at least one case and one operation");
  if (n.rows() != e.size()) throw DimensionError("fit: counts have " + std::to_string(n.rows()) + " rows, energies " +
                                                 std::to_string(e.size()));
  if (!(cfg.alpha > 0) || cfg.restarts < 1 || !(cfg.epsilon > 0) || cfg.max_iters < 1)
    throw FitError("fit config needs alpha > 0, restarts >= 1, epsilon > 0 and max_iters >= 1");

  const Eigen::Index l = n.cols();
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(l);
  if (cfg.standardize) {
    for (Eigen::Index j = 0; j < l; ++j) {
      double s = n.col(j).cwiseAbs().maxCoeff();
      if (s > 0) scale(j) = s;
    }
  }
  Eigen::MatrixXd x = n * scale.cwiseInverse().asDiagonal();
  double mean_row = x.rowwise().sum().cwiseAbs().mean();
  double w0 = mean_row > 0 ? e.cwiseAbs().mean() / mean_row : 1.0;

  std::vector<Descent> runs(static_cast<std::size_t>(cfg.restarts));
  auto work = [&](int k) {
    Rng rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(k), 0x666974ULL);
    Eigen::VectorXd w(l);
    for (Eigen::Index j = 0; j < l; ++j) w(j) = rng.uniform(cfg.init_lo, cfg.init_hi) * w0;
    runs[static_cast<std::size_t>(k)] = descend(x, e, std::move(w), cfg);
  };
  int jobs = cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, cfg.restarts);
  if (jobs <= 1) {
    for (int k = 0; k < cfg.restarts; ++k) work(k);
  } else {
    for (int base = 0; base < cfg.restarts; base += jobs) {
      std::vector<std::thread> pool;
      for (int k = base; k < std::min(cfg.restarts, base + jobs); ++k) pool.emplace_back(work, k);
      for (auto& t : pool) t.join();
    }
  }

  int best = -1;
  for (int k = 0; k < cfg.restarts; ++k) {
    const Descent& d = runs[static_cast<std::size_t>(k)];
    if (d.diverged) continue;
    if (best < 0 || d.j < runs[static_cast<std::size_t>(best)].j) best = k;
  }
  if (best < 0) throw FitError("gradient descent diverged in every restart; lower alpha (currently " +
                               std::to_string(cfg.alpha) + ")");
  const Descent& d = runs[static_cast<std::size_t>(best)];
  CostModel model;
  model.cost_j.resize(static_cast<std::size_t>(l));
  for (Eigen::Index j = 0; j < l; ++j) model.cost_j[static_cast<std::size_t>(j)] = d.w(j) / scale(j);
  model.seed = cfg.seed;
  model.iterations = d.iters;
  model.final_j = d.j;
  model.restart = best;
  model.j_history = d.history;
  return model;
}

CostModel fit(const CountsMatrix& n, const Eigen::VectorXd& e, const FitConfig& config) {
  CostModel m = fit(n.n, e, config);
  m.op_ids = n.op_ids;
  return m;
}

double nmae(const Eigen::VectorXd& est, const Eigen::VectorXd& meas, int* dropped) {
  if (est.size() != meas.size()) throw DimensionError("nmae: dimension mismatch");
  double sum = 0.0;
  int used = 0, skipped = 0;
  for (Eigen::Index i = 0; i < meas.size(); ++i) {
    if (meas(i) == 0.0) {
      ++skipped;
      continue;
    }
    sum += std::fabs((est(i) - meas(i)) / meas(i));
    ++used;
  }
  if (dropped) *dropped = skipped;
  return used ? sum / used : 0.0;
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) throw DimensionError("correlation needs two vectors of equal length >= 2");
  Eigen::VectorXd da = a.array() - a.mean();
  Eigen::VectorXd db = b.array() - b.mean();
  double va = da.squaredNorm(), vb = db.squaredNorm();
  if (va == 0.0 || vb == 0.0) throw FitError("correlation is undefined for a constant vector");
  return std::clamp(da.dot(db) / std::sqrt(va * vb), -1.0, 1.0);
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& n, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), n.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = n.row(rows[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<int>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
  return out;
}

}  // namespace

FitReport cross_validate(const Eigen::MatrixXd& n, const Eigen::VectorXd& e, const FitConfig& config, int rounds) {
  if (rounds < 2) throw FitError("cross-validation needs at least 2 rounds");
  if (n.rows() < rounds)
    throw FitError("cross-validation needs at least " + std::to_string(rounds) + " cases, got " +
                   std::to_string(n.rows()));
  std::vector<int> order(static_cast<std::size_t>(n.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  Rng rng = Rng::derive(config.seed, 0x666f6c6473ULL);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

  FitReport report;
  report.folds.resize(static_cast<std::size_t>(rounds));
  for (std::size_t i = 0; i < order.size(); ++i) report.folds[i % rounds].push_back(order[i]);
  for (auto& f : report.folds) std::sort(f.begin(), f.end());

  double best = 0.0;
  for (int k = 0; k < rounds; ++k) {
    std::vector<int> train;
    for (int q = 0; q < rounds; ++q)
      if (q != k) train.insert(train.end(), report.folds[q].begin(), report.folds[q].end());
    std::sort(train.begin(), train.end());
    const auto& val = report.folds[k];
    Eigen::MatrixXd nt = take_rows(n, train), nv = take_rows(n, val);
    Eigen::VectorXd et = take(e, train), ev = take(e, val);
    CostModel model = fit(nt, et, config);
    Eigen::VectorXd c = model.vector();
    Eigen::VectorXd pt = nt * c, pv = nv * c;
    RoundMetrics rm;
    rm.round = k + 1;
    rm.train_cases = static_cast<int>(train.size());
    rm.val_cases = static_cast<int>(val.size());
    rm.train_nmae = nmae(pt, et);
    rm.val_nmae = nmae(pv, ev);
    auto safe_r = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      try {
        return correlation(a, b);
      } catch (const FitError&) {
        return std::nan("");
      }
    };
    rm.train_r = safe_r(pt, et);
    rm.val_r = safe_r(pv, ev);
    rm.final_j = model.final_j;
    if (k == 0 || rm.val_nmae < best) {
      best = rm.val_nmae;
      report.chosen = k;
    }
    report.rounds.push_back(rm);
    report.models.push_back(std::move(model));
  }
  return report;
}

int column_rank(const Eigen::MatrixXd& n, double rel_tol) {
  if (n.size() == 0) return 0;
  Eigen::MatrixXd x = n;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double s = x.col(j).cwiseAbs().maxCoeff();
    if (s > 0) x.col(j) /= s;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(rel_tol);
  return static_cast<int>(qr.rank());
}

std::string model_to_json(const CostModel& model, const std::string& config_hash, int indent) {
  nlohmann::ordered_json ops = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < model.cost_j.size(); ++j)
    ops.push_back({{"id", j < model.op_ids.size() ? model.op_ids[j] : std::to_string(j)}, {"cost_j", model.cost_j[j]}});
  nlohmann::ordered_json root;
  root["ops"] = std::move(ops);
  root["meta"] = {{"seed", model.seed},
                  {"iters", model.iterations},
                  {"final_J", model.final_j},
                  {"restart", model.restart},
                  {"config_hash", config_hash}};
  return root.dump(indent);
}

CostModel model_from_json(const std::string& text) {
  CostModel m;
  try {
    auto root = nlohmann::json::parse(text);
    for (const auto& o : root.at("ops")) {
      m.op_ids.push_back(o.at("id").get<std::string>());
      m.cost_j.push_back(o.at("cost_j").get<double>());
    }
    const auto& meta = root.at("meta");
    m.seed = meta.value("seed", std::uint64_t{0});
    m.iterations = meta.value("iters", 0L);
    m.final_j = meta.value("final_J", 0.0);
    m.restart = meta.value("restart", 0);
  } catch (const nlohmann::json::exception& ex) {
    throw FitError(std::string("malformed model JSON: ") + ex.what());
  }
  return m;
}

std::string metrics_to_csv(const FitReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "round,train_r,val_r,train_nmae,val_nmae\n";
  for (const auto& r : report.rounds)
    out << r.round << ',' << r.train_r << ',' << r.val_r << ',' << r.train_nmae << ',' << r.val_nmae << '\n';
  return out.str();
}

}  // namespace emod
