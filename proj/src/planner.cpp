#include "slitsim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "slitsim/error.hpp"

namespace slitsim::planner {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

constexpr int kCoarsePlanes = 64;     // geometric toward the image plane
constexpr int kCoarseX = 257;         // across +-lambda*f/d
constexpr double kDepthCap = 1e-4;    // deepest plane at 2f - 1e-4*f
constexpr double kFidelityGate = 1e-6;
constexpr double kOverlapGate = 1e-10;

struct Target {
  CVec vec;        // gauged eigenvector
  double c_mod;    // |v_1|
  double s_mod;    // |v_2|
  double azimuth;  // arg(v_2 conj(v_1)), 0 when ill-defined
};

Target make_target(const CVec& v) {
  Target t;
  t.vec = v;
  t.c_mod = std::abs(v[0]);
  t.s_mod = std::abs(v[1]);
  t.azimuth = (t.c_mod > 1e-14 && t.s_mod > 1e-14) ? std::arg(v[1] * std::conj(v[0])) : 0.0;
  return t;
}

// |<target|phi(x)>|^2 with the normalized postselected state; scale factors
// cancel, so raw sinc components suffice.
double fidelity_at(const optics::SlitField& field, const Target& t, double x) {
  const double s1 = field.sinc_factor(1, x);
  const double s2 = field.sinc_factor(2, x);
  const double n2 = s1 * s1 + s2 * s2;
  if (n2 < 1e-300) return 0.0;
  const double beta = kTwoPi * x / field.phase_period();
  const Complex amp =
      std::conj(t.vec[0]) * s1 + std::conj(t.vec[1]) * s2 * std::polar(1.0, beta);
  return std::norm(amp) / n2;
}

// lattice scoring: at x = (azimuth/2pi + k/2)*period the inter-slit phase
// matches the target class exactly, so the fidelity reduces to a real form
double fidelity_on_lattice(const optics::SlitField& field, const Target& t, double x,
                           double sign) {
  const double s1 = field.sinc_factor(1, x);
  const double s2 = field.sinc_factor(2, x);
  const double n2 = s1 * s1 + s2 * s2;
  if (n2 < 1e-300) return 0.0;
  const double amp = t.c_mod * s1 + sign * t.s_mod * s2;
  return amp * amp / n2;
}

// geometric detection planes, w = 2f - z from f down to kDepthCap*f
std::vector<double> plane_grid(const OpticalGeometry& geom, int n) {
  std::vector<double> ws(n);
  for (int k = 0; k < n; ++k) {
    ws[k] = geom.focal_length * std::pow(kDepthCap, static_cast<double>(k) / (n - 1));
  }
  return ws;
}

struct BestPoint {
  double fidelity = -1.0;
  double x = 0.0;
};

// best lattice point of the target's phase class on one plane; k is walked
// outward from the axis so fidelity ties resolve to the largest envelope
BestPoint lattice_best(const optics::SlitField& field, const Target& t, double span) {
  const double period = field.phase_period();
  const double anchor = t.azimuth / kTwoPi * period;
  const long kmax = static_cast<long>(std::floor((span + std::abs(anchor)) / (0.5 * period))) + 1;
  BestPoint best;
  for (long step = 0; step <= 2 * kmax; ++step) {
    const long k = (step % 2 == 0) ? step / 2 : -(step / 2 + 1);
    const double x = anchor + 0.5 * static_cast<double>(k) * period;
    if (std::abs(x) > span) continue;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const double f = fidelity_on_lattice(field, t, x, sign);
    if (f > best.fidelity) {
      best.fidelity = f;
      best.x = x;
    }
  }
  return best;
}

// golden-section maximization, stops when the fidelity step drops below
// 1e-12 or after 200 iterations
BestPoint golden_max(const std::function<double(double)>& fn, double a, double b) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  double prev = std::max(fc, fd);
  for (int i = 0; i < 200; ++i) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = fn(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = fn(c);
    }
    const double cur = std::max(fc, fd);
    if (std::abs(cur - prev) < 1e-12 && i > 8) break;
    prev = cur;
  }
  BestPoint r;
  if (fc >= fd) {
    r.fidelity = fc;
    r.x = c;
  } else {
    r.fidelity = fd;
    r.x = d;
  }
  return r;
}

BestPoint polish_x(const OpticalGeometry& geom, const Target& t, double w, double x_seed) {
  const optics::SlitField field(geom, 2.0 * geom.focal_length - w);
  const double h = 0.25 * field.phase_period();
  BestPoint r = golden_max([&](double x) { return fidelity_at(field, t, x); }, x_seed - h,
                           x_seed + h);
  const double seed_f = fidelity_at(field, t, x_seed);
  if (seed_f > r.fidelity) {
    r.fidelity = seed_f;
    r.x = x_seed;
  }
  return r;
}

struct Candidate {
  double w = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  double f1 = -1.0;
  double f2 = -1.0;
  double score() const { return std::min(f1, f2); }
};

// overlap of the two realized, normalized states at one plane
Complex pair_overlap(const OpticalGeometry& geom, double w, double x1, double x2) {
  const double z = 2.0 * geom.focal_length - w;
  const optics::SlitField field(geom, z);
  CVec a, b;
  field.amplitudes(x1, a);
  field.amplitudes(x2, b);
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na < 1e-300 || nb < 1e-300) return Complex(1.0, 0.0);
  return inner(a, b) / std::sqrt(na * nb);
}

// Trims the pair onto exact mutual orthogonality. Both positions ride
// their phase tracks, x = (phase/2pi) * period(w): the free parameters are
// the partner phase mu and the plane w. Along w the inter-slit phases are
// then frozen and only the sinc moduli drift, so the two Newton directions
// stay well conditioned (a phase knob and a modulus knob).
bool orthogonality_trim(const OpticalGeometry& geom, const Target& t1, double lattice_index,
                        Candidate& cand) {
  const double f = geom.focal_length;
  const double w_min = kDepthCap * f * 0.5;
  const double phase1 = t1.azimuth + kPi * lattice_index;
  const auto period_of = [&](double w) { return geom.wavelength * w / geom.slit_separation; };

  double w = cand.w;
  double mu = kTwoPi * cand.x2 / period_of(w);
  const auto eval = [&](double mu_v, double w_v) {
    const double period = period_of(w_v);
    return pair_overlap(geom, w_v, phase1 / kTwoPi * period, mu_v / kTwoPi * period);
  };

  for (int it = 0; it < 60; ++it) {
    const Complex g = eval(mu, w);
    if (std::abs(g) < 1e-13) {
      const double period = period_of(w);
      cand.w = w;
      cand.x1 = phase1 / kTwoPi * period;
      cand.x2 = mu / kTwoPi * period;
      return true;
    }
    const double dmu = 1e-6;
    const double dw = 1e-6 * w;
    const Complex gm = (eval(mu + dmu, w) - g) / dmu;
    const Complex gw = (eval(mu, w + dw) - g) / dw;
    // solve [Re gm, Re gw; Im gm, Im gw] * (sm, sw) = -(Re g, Im g)
    const double det = gm.real() * gw.imag() - gw.real() * gm.imag();
    if (std::abs(det) < 1e-300) return false;
    const double sm = (-g.real() * gw.imag() + gw.real() * g.imag()) / det;
    const double sw = (-gm.real() * g.imag() + g.real() * gm.imag()) / det;
    const double scale = std::max({1.0, std::abs(sm) / 0.5, std::abs(sw) / (0.02 * w)});
    mu += sm / scale;
    w += sw / scale;
    if (w < w_min) w = w_min;
    if (w > f) w = f;
  }
  return false;
}

void assign_candidate_fidelities(const OpticalGeometry& geom, const Target& t1, const Target& t2,
                                 Candidate& cand) {
  const optics::SlitField field(geom, 2.0 * geom.focal_length - cand.w);
  cand.f1 = fidelity_at(field, t1, cand.x1);
  cand.f2 = fidelity_at(field, t2, cand.x2);
}

// h(w) = c*s2*sign - s*s1 along a lattice-tracked branch crosses zero where
// the sinc ratio matches the target polar angle
double branch_mismatch(const OpticalGeometry& geom, const Target& t, double lattice_index,
                       double w) {
  const double z = 2.0 * geom.focal_length - w;
  const optics::SlitField field(geom, z);
  const double period = field.phase_period();
  const double x = (t.azimuth / kTwoPi + 0.5 * lattice_index) * period;
  const double sign = (static_cast<long>(lattice_index) % 2 == 0) ? 1.0 : -1.0;
  const double s1 = field.sinc_factor(1, x);
  const double s2 = field.sinc_factor(2, x);
  return t.c_mod * s2 * sign - t.s_mod * s1;
}

double unit_capped(double fidelity) { return fidelity > 1.0 ? 1.0 : fidelity; }

bool is_slit_state(const CVec& v, int& slit) {
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (std::abs(v[j]) >= 1.0 - 1e-12) {
      slit = static_cast<int>(j) + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

PovmPlan plan_povm(const Observable& obs, const OpticalGeometry& geom, bool rescale) {
  optics::validate_geometry(geom);
  if (obs.dim != geom.slit_count) {
    throw Error(ErrorCode::DimensionMismatch, "observable dimension != slit count");
  }
  const EigenSystem sys = qstate::eigenbasis(obs);
  PovmPlan plan;
  plan.observable = obs;
  plan.eigenvalues = sys.values;
  plan.degenerate = sys.degenerate;
  plan.detection_x = 0.0;
  plan.detection_z = geom.focal_length;
  plan.settings.reserve(obs.dim);
  for (const CVec& v : sys.vectors) plan.settings.push_back(povm::synthesize_settings(v, rescale));
  return plan;
}

PovmPlan plan_povm_from_spatial(const SpatialPlan& plan, const OpticalGeometry& geom,
                                bool rescale) {
  PovmPlan out;
  out.observable = plan.observable;
  out.eigenvalues = plan.eigenvalues;
  out.degenerate = plan.degenerate;
  out.detection_x = 0.0;
  out.detection_z = geom.focal_length;
  for (const PostselectedState& st : realized_states(geom, plan)) {
    out.settings.push_back(povm::synthesize_settings(st.normalized, rescale));
  }
  return out;
}

std::vector<PostselectedState> realized_states(const OpticalGeometry& geom,
                                               const SpatialPlan& plan) {
  std::vector<PostselectedState> states;
  states.reserve(plan.positions.size());
  if (plan.image_plane) {
    const double delta = 0.5 * (geom.slit_count + 1);
    for (double x : plan.positions) {
      const int slit = static_cast<int>(std::lround(x / geom.slit_separation + delta));
      states.push_back(optics::image_plane_projector(geom, slit));
    }
  } else {
    for (double x : plan.positions) states.push_back(optics::postselected_state(geom, x, plan.z));
  }
  return states;
}

std::vector<double> compensation_factors(const OpticalGeometry& geom, const SpatialPlan& plan) {
  if (plan.image_plane) {
    return std::vector<double>(plan.positions.size(), 1.0);  // equal slit-image peaks
  }
  std::vector<double> env(plan.positions.size());
  double max_env = 0.0;
  for (std::size_t l = 0; l < plan.positions.size(); ++l) {
    env[l] = optics::envelope(geom, plan.positions[l], plan.z);
    if (env[l] <= 1e-300) {
      throw Error(ErrorCode::DarkPoint, "diffraction envelope vanishes at a plan position",
                  env[l]);
    }
    max_env = std::max(max_env, env[l]);
  }
  std::vector<double> factors(env.size());
  for (std::size_t l = 0; l < env.size(); ++l) factors[l] = max_env / env[l];
  return factors;
}

SpatialPlan plan_spatial(const Observable& obs, const OpticalGeometry& geom) {
  optics::validate_geometry(geom);
  if (geom.slit_count != 2 || obs.dim != 2) {
    throw Error(ErrorCode::WrongDimension, "the position search is defined for two slits");
  }
  const EigenSystem sys = qstate::eigenbasis(obs);

  SpatialPlan plan;
  plan.observable = obs;
  plan.eigenvalues = sys.values;
  plan.degenerate = sys.degenerate;

  const double f = geom.focal_length;
  const double d = geom.slit_separation;
  const double lambda = geom.wavelength;
  const double delta = 0.5 * (geom.slit_count + 1);

  // slit-state eigenvectors: measure at the slit images
  {
    int slit1 = 0, slit2 = 0;
    if (is_slit_state(sys.vectors[0], slit1) && is_slit_state(sys.vectors[1], slit2)) {
      plan.image_plane = true;
      plan.z = 2.0 * f;
      plan.positions = {d * (slit1 - delta), d * (slit2 - delta)};
      plan.compensation = {1.0, 1.0};
      plan.fidelities = {1.0, 1.0};
      return plan;
    }
  }

  const Target t1 = make_target(sys.vectors[0]);
  const Target t2 = make_target(sys.vectors[1]);

  // equal-modulus eigenvectors: the focal plane realizes any relative
  // phase, x = azimuth * period / 2pi with period lambda*f/d
  if (std::abs(t1.c_mod - t1.s_mod) <= 1e-9) {
    plan.image_plane = false;
    plan.z = f;
    const double period = lambda * f / d;
    plan.positions = {t1.azimuth / kTwoPi * period, t2.azimuth / kTwoPi * period};
    plan.compensation = compensation_factors(geom, plan);
    const auto states = realized_states(geom, plan);
    plan.fidelities = {unit_capped(std::norm(inner(t1.vec, states[0].normalized))),
                       unit_capped(std::norm(inner(t2.vec, states[1].normalized)))};
    return plan;
  }

  // relative phase +-pi/2: symmetric positions, orthogonal by parity
  if (std::abs(std::cos(t1.azimuth)) <= 1e-9 && t1.c_mod > 1e-14 && t1.s_mod > 1e-14) {
    Target snap1 = t1;
    snap1.azimuth = (t1.azimuth > 0 ? 0.5 : -0.5) * kPi;
    Target snap2 = t2;
    snap2.azimuth = (t2.azimuth > 0 ? 0.5 : -0.5) * kPi;
    // solve the sinc-ratio condition along even lattice branches of
    // whichever vector admits a root, deepest grid plane to shallowest
    const std::vector<double> ws = plane_grid(geom, 512);
    struct Root {
      double w = -1.0;
      double x = 0.0;
      int which = 0;
    };
    Root found;
    for (long abs_k = 0; abs_k <= 8 && found.w < 0; ++abs_k) {
      for (int sgn = 0; sgn < (abs_k == 0 ? 1 : 2) && found.w < 0; ++sgn) {
        const double k = static_cast<double>((sgn == 0) ? 2 * abs_k : -2 * abs_k);
        for (int which = 0; which < 2 && found.w < 0; ++which) {
          const Target& t = which == 0 ? snap1 : snap2;
          double prev = branch_mismatch(geom, t, k, ws[0]);
          for (std::size_t i = 1; i < ws.size(); ++i) {
            const double cur = branch_mismatch(geom, t, k, ws[i]);
            if (prev == 0.0 || (prev < 0.0) != (cur < 0.0)) {
              double lo = ws[i - 1], hi = ws[i];
              double flo = prev;
              for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = branch_mismatch(geom, t, k, mid);
                if ((fm < 0.0) == (flo < 0.0)) {
                  lo = mid;
                  flo = fm;
                } else {
                  hi = mid;
                }
              }
              const double w = 0.5 * (lo + hi);
              const double period = lambda * w / d;
              const double x = (t.azimuth / kTwoPi + 0.5 * k) * period;
              const optics::SlitField field(geom, 2.0 * f - w);
              if (fidelity_at(field, t, x) >= 1.0 - kFidelityGate) {
                found = Root{w, x, which};
                break;
              }
            }
            prev = cur;
          }
        }
      }
    }
    if (found.w > 0) {
      plan.image_plane = false;
      plan.z = 2.0 * f - found.w;
      const double x_solved = found.x;
      plan.positions = found.which == 0 ? std::vector<double>{x_solved, -x_solved}
                                        : std::vector<double>{-x_solved, x_solved};
      plan.compensation = compensation_factors(geom, plan);
      const auto states = realized_states(geom, plan);
      plan.fidelities = {unit_capped(std::norm(inner(t1.vec, states[0].normalized))),
                         unit_capped(std::norm(inner(t2.vec, states[1].normalized)))};
      if (std::min(plan.fidelities[0], plan.fidelities[1]) >= 1.0 - kFidelityGate) {
        return plan;
      }
    }
    // fall through to the generic search otherwise
  }

  // generic targets: spec grid first, then the exact-phase lattice of each
  // plane, shallow planes preferred for their larger envelope
  const std::vector<double> ws = plane_grid(geom, kCoarsePlanes);
  const double span = lambda * f / d;

  Candidate best;
  double best_lattice_index = 0.0;
  for (std::size_t pi = 0; pi < ws.size(); ++pi) {
    const double w = ws[pi];
    const double z = 2.0 * f - w;
    const optics::SlitField field(geom, z);

    BestPoint b1 = lattice_best(field, t1, span);
    BestPoint b2 = lattice_best(field, t2, span);
    // fold in the coarse grid points (their value is subsumed by the
    // lattice in practice, but they are cheap)
    for (int i = 0; i < kCoarseX; ++i) {
      const double x = -span + 2.0 * span * i / (kCoarseX - 1);
      const double f1 = fidelity_at(field, t1, x);
      const double f2 = fidelity_at(field, t2, x);
      if (f1 > b1.fidelity) b1 = BestPoint{f1, x};
      if (f2 > b2.fidelity) b2 = BestPoint{f2, x};
    }
    if (std::min(b1.fidelity, b2.fidelity) <= best.score()) continue;

    const BestPoint p1 = polish_x(geom, t1, w, b1.x);
    const BestPoint p2 = polish_x(geom, t2, w, b2.x);
    Candidate cand;
    cand.w = w;
    cand.x1 = p1.x;
    cand.x2 = p2.x;
    cand.f1 = p1.fidelity;
    cand.f2 = p2.fidelity;
    if (cand.score() > best.score()) {
      best = cand;
      const double period = field.phase_period();
      best_lattice_index = std::round((p1.x - t1.azimuth / kTwoPi * period) / (0.5 * period));
    }
    if (best.score() >= 1.0 - 1e-9) break;
  }

  // sharpen the sinc-ratio match of vector 1 along its lattice branch, then
  // re-pick vector 2 on the refined plane
  if (best.score() > 0.0 && best.score() < 1.0 - 1e-10) {
    const double w0 = best.w;
    const double lo = std::max(kDepthCap * f * 0.75, w0 * 0.8);
    const double hi = std::min(f, w0 * 1.25);
    double wa = lo;
    double fa = branch_mismatch(geom, t1, best_lattice_index, wa);
    const int scan = 65;
    for (int i = 1; i < scan; ++i) {
      const double wb = lo + (hi - lo) * i / (scan - 1);
      const double fb = branch_mismatch(geom, t1, best_lattice_index, wb);
      if ((fa < 0.0) != (fb < 0.0)) {
        double a = wa, b = wb, va = fa;
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (a + b);
          const double vm = branch_mismatch(geom, t1, best_lattice_index, mid);
          if ((vm < 0.0) == (va < 0.0)) {
            a = mid;
            va = vm;
          } else {
            b = mid;
          }
        }
        const double w = 0.5 * (a + b);
        const optics::SlitField field(geom, 2.0 * f - w);
        const double period = field.phase_period();
        const double x1 = (t1.azimuth / kTwoPi + 0.5 * best_lattice_index) * period;
        if (fidelity_at(field, t1, x1) > best.f1) {
          const BestPoint nb2 = lattice_best(field, t2, span);
          const BestPoint p2 = polish_x(geom, t2, w, nb2.x);
          Candidate cand;
          cand.w = w;
          cand.x1 = x1;
          cand.x2 = p2.x;
          assign_candidate_fidelities(geom, t1, t2, cand);
          if (cand.score() > best.score()) best = cand;
        }
      }
      wa = wb;
      fa = fb;
    }
  }

  if (best.score() < 0.0) {
    throw Error(ErrorCode::SearchFailed, "no viable detection plane found", 0.0);
  }

  // exact mutual orthogonality of the realized pair; without it the
  // outcome probabilities would not close to unit sum
  Candidate trimmed = best;
  const bool ok = orthogonality_trim(geom, t1, best_lattice_index, trimmed);
  if (ok) {
    assign_candidate_fidelities(geom, t1, t2, trimmed);
    if (trimmed.score() > best.score() - 1e-7) best = trimmed;
  }

  const double overlap = std::abs(pair_overlap(geom, best.w, best.x1, best.x2));
  if (std::min(best.f1, best.f2) < 1.0 - kFidelityGate || overlap > kOverlapGate) {
    throw Error(ErrorCode::SearchFailed,
                "best fidelities " + std::to_string(best.f1) + ", " + std::to_string(best.f2) +
                    " (pair overlap " + std::to_string(overlap) + ")",
                std::min(best.f1, best.f2));
  }

  plan.image_plane = false;
  plan.z = 2.0 * f - best.w;
  plan.positions = {best.x1, best.x2};
  plan.compensation = compensation_factors(geom, plan);
  plan.fidelities = {unit_capped(best.f1), unit_capped(best.f2)};
  return plan;
}

Statistics predicted_statistics(const DensityMatrix& rho, const PovmPlan& plan,
                                const OpticalGeometry& geom) {
  Statistics st;
  st.probabilities = povm::fixed_point_probabilities(rho, plan.settings, geom, plan.detection_z);
  st.expectation = 0.0;
  for (std::size_t l = 0; l < st.probabilities.size(); ++l) {
    st.expectation += plan.eigenvalues[l] * st.probabilities[l];
  }
  return st;
}

Statistics predicted_statistics(const DensityMatrix& rho, const SpatialPlan& plan,
                                const OpticalGeometry& geom) {
  if (rho.dim != static_cast<int>(plan.positions.size())) {
    throw Error(ErrorCode::DimensionMismatch, "state and plan dimensions differ");
  }
  const auto states = realized_states(geom, plan);
  Statistics st;
  if (plan.image_plane) {
    st.probabilities = optics::outcome_probabilities(rho, states);
  } else {
    // raw count rates, envelope compensation, then normalization
    optics::outcome_probabilities(rho, states);  // orthogonality/unit-sum checks
    std::vector<double> weights(states.size());
    double sum = 0.0;
    for (std::size_t l = 0; l < states.size(); ++l) {
      weights[l] =
          optics::detection_density(rho, geom, plan.positions[l], plan.z) * plan.compensation[l];
      sum += weights[l];
    }
    if (sum <= 1e-300) throw Error(ErrorCode::AllZero, "all compensated rates underflow");
    for (double& p : weights) p /= sum;
    st.probabilities = weights;
  }
  st.expectation = 0.0;
  for (std::size_t l = 0; l < st.probabilities.size(); ++l) {
    st.expectation += plan.eigenvalues[l] * st.probabilities[l];
  }
  return st;
}

}  // namespace slitsim::planner
