#include "nhknot/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nhknot/errors.hpp"

namespace nhknot {
namespace {

constexpr double kPhaseStepBound = kPi / 2.0;
constexpr double kExceptionalFloor = 1e-12;

Vec2 eigenvector_for(const Mat2& h, Complex value) {
  // Both columns of adj(H - value) span the eigenspace; take the better conditioned one.
  const Vec2 a(h(0, 1), value - h(0, 0));
  const Vec2 b(value - h(1, 1), h(1, 0));
  const Vec2& pick = a.squaredNorm() >= b.squaredNorm() ? a : b;
  if (pick.squaredNorm() == 0.0) return Vec2(1.0, 0.0);
  return pick;
}

struct TrackPoint {
  std::array<Complex, 2> values;
  std::array<Vec2, 2> vectors;
};

class Tracker {
 public:
  Tracker(const BlochFunction& h, const BandOptions& options) : h_(h), options_(options) {}

  TrackPoint solve(double k) {
    const Eigensystem2 es = eigensolve2(h_(k));
    const double gap = std::abs(es.values[0] - es.values[1]);
    if (gap < min_gap_) {
      min_gap_ = gap;
      min_gap_k_ = k;
    }
    if (gap < options_.gap_tolerance) fail();
    return {es.values, es.vectors};
  }

  // Continues the labelled bands from (ka, from) to kb, bisecting while a step
  // moves an eigenvalue by more than half of the local gap.
  TrackPoint advance(double ka, const TrackPoint& from, double kb, int depth = 0) {
    TrackPoint to = solve(kb);
    match(from, to);
    const double half_gap = 0.5 * std::abs(from.values[0] - from.values[1]);
    const double step = std::max(std::abs(to.values[0] - from.values[0]),
                                 std::abs(to.values[1] - from.values[1]));
    if (step <= half_gap) return to;
    if (depth >= options_.max_refinement_depth) fail();
    const double km = 0.5 * (ka + kb);
    ++refinements_;
    const TrackPoint mid = advance(ka, from, km, depth + 1);
    return advance(km, mid, kb, depth + 1);
  }

  static void match(const TrackPoint& from, TrackPoint& to) {
    const double keep = std::abs(to.values[0] - from.values[0]) + std::abs(to.values[1] - from.values[1]);
    const double swap = std::abs(to.values[1] - from.values[0]) + std::abs(to.values[0] - from.values[1]);
    if (swap < keep) {
      std::swap(to.values[0], to.values[1]);
      std::swap(to.vectors[0], to.vectors[1]);
    }
  }

  double min_gap() const { return min_gap_; }
  std::size_t refinements() const { return refinements_; }

 private:
  [[noreturn]] void fail() const {
    std::ostringstream msg;
    msg << "bands inseparable: gap " << min_gap_ << " at k = " << min_gap_k_ / kPi
        << " pi (tolerance " << options_.gap_tolerance << ")";
    throw BandsInseparable(msg.str());
  }

  const BlochFunction& h_;
  BandOptions options_;
  double min_gap_ = std::numeric_limits<double>::infinity();
  double min_gap_k_ = 0.0;
  std::size_t refinements_ = 0;
};

Complex reduced_determinant(const Mat2& h) {
  const Complex half_trace = 0.5 * h.trace();
  return (h(0, 0) - half_trace) * (h(1, 1) - half_trace) - h(0, 1) * h(1, 0);
}

class PhaseUnwrapper {
 public:
  explicit PhaseUnwrapper(const BlochFunction& h) : h_(h) {}

  Complex eval(double k) {
    ++evaluations_;
    const Complex f = reduced_determinant(h_(k));
    if (std::abs(f) < kExceptionalFloor) {
      std::ostringstream msg;
      msg << "exceptional point: |Det[H - Tr(H)/2]| = " << std::abs(f) << " at k = " << k / kPi << " pi";
      throw ExceptionalPoint(msg.str());
    }
    return f;
  }

  double increment(double ka, Complex fa, double kb, Complex fb, int depth = 0) {
    const double step = std::arg(fb / fa);
    if (std::abs(step) < kPhaseStepBound) return step;
    if (depth > 50) throw ConvergenceFailure("winding number: phase refinement did not converge");
    const double km = 0.5 * (ka + kb);
    const Complex fm = eval(km);
    return increment(ka, fa, km, fm, depth + 1) + increment(km, fm, kb, fb, depth + 1);
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  const BlochFunction& h_;
  std::size_t evaluations_ = 0;
};

}  // namespace

Vec2 canonical_gauge(const Vec2& v) {
  const int lead = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
  const Complex phase = v(lead) / std::abs(v(lead));
  Vec2 out = v / (phase * v.norm());
  out(lead) = std::abs(out(lead));
  return out;
}

Eigensystem2 eigensolve2(const Mat2& h) {
  const Complex half_trace = 0.5 * h.trace();
  const Complex half_diff = 0.5 * (h(0, 0) - h(1, 1));
  const Complex root = std::sqrt(half_diff * half_diff + h(0, 1) * h(1, 0));

  Eigensystem2 out;
  out.values = {half_trace + root, half_trace - root};
  const double scale = std::max({std::abs(h(0, 0)), std::abs(h(1, 1)), std::abs(h(0, 1)), std::abs(h(1, 0))});
  const bool off_diagonal = std::abs(h(0, 1)) + std::abs(h(1, 0)) + std::abs(h(0, 0) - h(1, 1)) > 0.0;
  out.exceptional = off_diagonal && std::abs(root) <= 1e-14 * std::max(scale, 1e-300);

  if (!off_diagonal) {
    out.vectors = {Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
    return out;
  }
  for (int n = 0; n < 2; ++n) out.vectors[n] = canonical_gauge(eigenvector_for(h, out.values[n]));
  return out;
}

BandStructure band_structure(const BlochFunction& hamiltonian, std::size_t grid,
                             const BandOptions& options) {
  if (grid < 16) throw InvalidArgument("band_structure: grid size must be >= 16");
  Tracker tracker(hamiltonian, options);
  BandStructure out;
  out.k.resize(grid);
  for (int n = 0; n < 2; ++n) {
    out.energies[n].resize(grid);
    out.vectors[n].resize(grid);
  }

  const double dk = kTwoPi / static_cast<double>(grid);
  TrackPoint current = tracker.solve(0.0);
  const TrackPoint origin = current;
  for (std::size_t i = 0; i < grid; ++i) {
    const double k = dk * static_cast<double>(i);
    if (i > 0) current = tracker.advance(out.k[i - 1], current, k);
    out.k[i] = k;
    for (int n = 0; n < 2; ++n) {
      out.energies[n][i] = current.values[n];
      out.vectors[n][i] = current.vectors[n];
    }
  }

  const TrackPoint closing = tracker.advance(out.k.back(), current, kTwoPi);
  for (int n = 0; n < 2; ++n) {
    const double to0 = std::abs(closing.values[n] - origin.values[0]);
    const double to1 = std::abs(closing.values[n] - origin.values[1]);
    out.permutation[n] = to0 <= to1 ? 0 : 1;
  }
  if (out.permutation[0] == out.permutation[1]) {
    throw BandsInseparable("band_structure: seam matching is not a permutation");
  }
  out.min_gap = tracker.min_gap();
  out.refinements = tracker.refinements();
  return out;
}

BandStructure band_structure(const ModelParams& params, std::size_t grid, const BandOptions& options) {
  params.validate();
  return band_structure([&params](double k) { return bloch_hamiltonian(params, k); }, grid, options);
}

WindingResult winding_number(const BlochFunction& hamiltonian, std::size_t grid) {
  if (grid < 2) throw InvalidArgument("winding_number: grid size must be >= 2");
  PhaseUnwrapper unwrap(hamiltonian);
  const double dk = kTwoPi / static_cast<double>(grid);
  const Complex f0 = unwrap.eval(0.0);
  Complex fa = f0;
  double total = 0.0;
  for (std::size_t i = 1; i <= grid; ++i) {
    const double ka = dk * static_cast<double>(i - 1);
    const double kb = i == grid ? kTwoPi : dk * static_cast<double>(i);
    const Complex fb = i == grid ? unwrap.eval(kTwoPi) : unwrap.eval(kb);
    total += unwrap.increment(ka, fa, kb, fb);
    fa = fb;
  }
  WindingResult out;
  out.raw = total / kTwoPi;
  out.nu = static_cast<int>(std::lround(out.raw));
  out.residue = std::abs(out.raw - out.nu);
  out.evaluations = unwrap.evaluations();
  if (out.residue >= 0.01) {
    throw ConvergenceFailure("winding number: rounding residue " + std::to_string(out.residue) +
                             " exceeds 0.01");
  }
  return out;
}

WindingResult winding_number(const ModelParams& params, std::size_t grid) {
  params.validate();
  return winding_number([&params](double k) { return bloch_hamiltonian(params, k); }, grid);
}

std::string phase_tag(int nu) {
  switch (nu) {
    case 0: return "unlink";
    case 1: return "unknot";
    case 2: return "hopf_link";
    default: return "braid(" + std::to_string(nu) + ")";
  }
}

PhaseLabel classify(const ModelParams& params, std::size_t grid) {
  const BandStructure bands = band_structure(params, grid);
  const WindingResult w = winding_number(params, grid);
  return {w.nu, phase_tag(w.nu), bands.min_gap, grid};
}

}  // namespace nhknot
