#include "lalnet/gradcheck.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace lalnet {

namespace {
std::atomic<bool> g_finite_checks{false};
}

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled); }
bool finite_checks_enabled() { return g_finite_checks.load(std::memory_order_relaxed); }

namespace {

double projected(const Tensor<double>& out, const Tensor<double>& proj) {
  double s = 0.0;
  for (int64_t i = 0; i < out.size(); ++i) s += out[i] * proj[i];
  return s;
}

double evaluate(const GradClosure& fn, const std::vector<Tensor<double>>& inputs, const Tensor<double>& proj) {
  Tape<double> tape;
  std::vector<Var<double>> vars;
  for (const auto& t : inputs) vars.push_back(tape.constant(t));
  return projected(fn(tape, vars).value(), proj);
}

}  // namespace

GradCheckResult grad_check(const GradClosure& fn, const std::vector<Tensor<double>>& inputs,
                           const GradCheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  Tape<double> tape;
  std::vector<Var<double>> vars;
  for (const auto& t : inputs) vars.push_back(tape.parameter(t));
  Var<double> out = fn(tape, vars);
  Tensor<double> proj(out.shape());
  for (auto& v : proj.data()) v = unit(rng);
  tape.backward(out, proj);

  struct Probe {
    size_t input;
    int64_t coord;
    double analytic, numeric;
  };
  std::vector<Probe> probes;
  std::vector<Tensor<double>> work = inputs;
  for (size_t k = 0; k < inputs.size(); ++k) {
    const Tensor<double> analytic = vars[k].grad();
    std::vector<int64_t> coords(static_cast<size_t>(inputs[k].size()));
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_input > 0 && static_cast<int64_t>(coords.size()) > options.max_coords_per_input) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(static_cast<size_t>(options.max_coords_per_input));
      std::sort(coords.begin(), coords.end());
    }
    for (int64_t c : coords) {
      const double x0 = work[k][c];
      work[k][c] = x0 + options.step;
      const double fp = evaluate(fn, work, proj);
      work[k][c] = x0 - options.step;
      const double fm = evaluate(fn, work, proj);
      work[k][c] = x0;
      probes.push_back({k, c, analytic[c], (fp - fm) / (2.0 * options.step)});
    }
  }

  double scale = 0.0;
  for (const auto& p : probes) scale = std::max(scale, std::abs(p.numeric));
  const double floor = std::max(1e-12, options.relative_floor * scale);
  GradCheckResult result;
  for (const auto& p : probes) {
    const double err = std::abs(p.analytic - p.numeric) / std::max({floor, std::abs(p.numeric), std::abs(p.analytic)});
    ++result.coords_checked;
    if (err > result.max_rel_error || std::isnan(err)) {
      result.max_rel_error = std::isnan(err) ? INFINITY : err;
      std::ostringstream os;
      os << "input " << p.input << ", coord " << p.coord << ": analytic " << p.analytic << " vs numeric " << p.numeric;
      result.worst = os.str();
    }
  }
  return result;
}

}  // namespace lalnet
