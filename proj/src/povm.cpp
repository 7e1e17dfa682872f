#include "slitsim/povm.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "slitsim/error.hpp"

namespace slitsim::povm {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

double wrap_2pi(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

void check_dims(const DensityMatrix& rho, const LcdSettings& settings) {
  if (rho.dim != settings.dim) {
    throw Error(ErrorCode::DimensionMismatch, "state and settings dimensions differ");
  }
}

// sum_ij conj(w_i) rho_ij w_j for w = conj(kraus diagonal); real and >= 0
// for a valid state.
double coherent_sum(const DensityMatrix& rho, const CVec& kraus_diag) {
  CVec w(kraus_diag.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::conj(kraus_diag[i]);
  const Complex s = expectation(rho.entries, w);
  return std::max(0.0, s.real());
}

}  // namespace

void validate_settings(const LcdSettings& settings) {
  const int d = settings.dim;
  if (d < 2) throw Error(ErrorCode::ValidationError, "settings need dim >= 2");
  if (static_cast<int>(settings.thetas.size()) != d ||
      static_cast<int>(settings.phis.size()) != d) {
    throw Error(ErrorCode::ValidationError, "settings arrays must have D entries");
  }
  for (double t : settings.thetas) {
    if (t < -kPi / 4 - 1e-12 || t > kPi / 4 + 1e-12) {
      throw Error(ErrorCode::ValidationError, "theta outside [-pi/4, pi/4]", t);
    }
  }
  for (double p : settings.phis) {
    if (p < 0.0 || p >= kTwoPi) {
      throw Error(ErrorCode::ValidationError, "phase outside [0, 2*pi)", p);
    }
  }
  if (std::abs(settings.phis[0]) > 1e-12) {
    throw Error(ErrorCode::ValidationError, "gauge requires the first phase to be 0",
                settings.phis[0]);
  }
  if (settings.rescale_weight < 1.0 - 1e-12) {
    throw Error(ErrorCode::ValidationError, "rescale weight must be >= 1",
                settings.rescale_weight);
  }
}

const DensityMatrix& OutcomeResult::state() const {
  if (!post_state) {
    throw Error(ErrorCode::ImpossibleOutcome,
                "outcome probability below 1e-12; the post-measurement state is undefined");
  }
  return *post_state;
}

CVec kraus_diagonal(const LcdSettings& settings, Outcome p) {
  validate_settings(settings);
  // the rescale factor already lives inside the synthesized angles, so the
  // pair stays a complete POVM for any settings
  CVec diag(settings.dim);
  for (int j = 0; j < settings.dim; ++j) {
    const double mag = p == Outcome::H ? std::cos(2.0 * settings.thetas[j])
                                       : std::sin(2.0 * settings.thetas[j]);
    diag[j] = std::polar(mag, settings.phis[j]);
  }
  return diag;
}

CMat build_unitary(const LcdSettings& settings) {
  validate_settings(settings);
  const int d = settings.dim;
  CMat u(2 * d);
  for (int j = 0; j < d; ++j) {
    const Complex phase = std::polar(1.0, settings.phis[j]);
    const double c = std::cos(2.0 * settings.thetas[j]);
    const double s = std::sin(2.0 * settings.thetas[j]);
    u(2 * j, 2 * j) = phase * c;
    u(2 * j, 2 * j + 1) = phase * -s;
    u(2 * j + 1, 2 * j) = phase * s;
    u(2 * j + 1, 2 * j + 1) = phase * c;
  }
  return u;
}

PovmPair povm_elements(const LcdSettings& settings) {
  const CVec ah = kraus_diagonal(settings, Outcome::H);
  const CVec av = kraus_diagonal(settings, Outcome::V);
  const int d = settings.dim;
  PovmPair pair{CMat(d), CMat(d), CMat(d), CMat(d)};
  for (int j = 0; j < d; ++j) {
    pair.a_h(j, j) = ah[j];
    pair.a_v(j, j) = av[j];
    pair.pi_h(j, j) = std::norm(ah[j]);
    pair.pi_v(j, j) = std::norm(av[j]);
  }
#ifndef NDEBUG
  // contracted form against <p|U|H> from the full unitary
  const CMat u = build_unitary(settings);
  for (int j = 0; j < d; ++j) {
    assert(std::abs(u(2 * j, 2 * j) - pair.a_h(j, j)) < 1e-12);
    assert(std::abs(u(2 * j + 1, 2 * j) - pair.a_v(j, j)) < 1e-12);
  }
#endif
  return pair;
}

OutcomeResult apply_outcome(const DensityMatrix& rho, const LcdSettings& settings, Outcome p) {
  check_dims(rho, settings);
  const CVec a = kraus_diagonal(settings, p);
  const int d = rho.dim;

  double prob = 0.0;
  for (int j = 0; j < d; ++j) prob += std::norm(a[j]) * rho.entries(j, j).real();

  OutcomeResult result;
  result.probability = prob;
  if (prob <= 1e-12) return result;

  CMat post(d);
  for (int i = 0; i < d; ++i) {
    post(i, i) = Complex(std::norm(a[i]) * rho.entries(i, i).real() / prob, 0.0);
    for (int j = i + 1; j < d; ++j) {
      const Complex v = a[i] * rho.entries(i, j) * std::conj(a[j]) / prob;
      post(i, j) = v;
      post(j, i) = std::conj(v);
    }
  }
  result.post_state = qstate::validate_density(post);
  return result;
}

double total_density(const DensityMatrix& rho, const LcdSettings& settings,
                     const OpticalGeometry& geom, double z) {
  check_dims(rho, settings);
  if (rho.dim != geom.slit_count) {
    throw Error(ErrorCode::DimensionMismatch, "settings and slit count differ");
  }
  const optics::SlitField field(geom, z);
  const double env = std::norm(field.amplitude(1, 0.0));
  const CVec a = kraus_diagonal(settings, Outcome::H);
  const double density = env * coherent_sum(rho, a);
#ifndef NDEBUG
  // factorization against P_H * detection density of the post-measurement
  // state, where the equal-amplitude premise of the envelope prefactor holds
  bool equal_amps = true;
  const Complex a1 = field.amplitude(1, 0.0);
  for (int j = 2; j <= geom.slit_count; ++j) {
    if (std::abs(field.amplitude(j, 0.0) - a1) > 1e-9 * std::abs(a1)) equal_amps = false;
  }
  if (equal_amps) {
    const OutcomeResult res = apply_outcome(rho, settings, Outcome::H);
    if (res.probability > 1e-12) {
      const double rhs =
          res.probability * optics::detection_density(res.state(), geom, 0.0, z);
      assert(std::abs(density - rhs) <= 1e-12 * std::max(env, density));
    }
  }
#endif
  return density;
}

LcdSettings synthesize_settings(const CVec& target, bool rescale) {
  const int d = static_cast<int>(target.size());
  if (d < 2) throw Error(ErrorCode::WrongDimension, "target needs dim >= 2");
  const double n2 = norm2(target);
  if (std::abs(n2 - 1.0) > 1e-12) {
    throw Error(ErrorCode::NotNormalized, "target vector not normalized", std::abs(n2 - 1.0));
  }

  double max_mod = 0.0;
  for (const Complex& c : target) max_mod = std::max(max_mod, std::abs(c));
  const double c = rescale ? 1.0 / max_mod : 1.0;

  LcdSettings s;
  s.dim = d;
  s.thetas.resize(d);
  s.phis.resize(d);
  s.rescale_weight = c;

  int anchor = -1;
  for (int j = 0; j < d; ++j) {
    const double mod = std::abs(target[j]);
    s.thetas[j] = 0.5 * std::acos(std::clamp(c * mod, 0.0, 1.0));
    if (mod > 1e-12) {
      s.phis[j] = -std::arg(target[j]);
      if (anchor < 0) anchor = j;
    } else {
      s.phis[j] = 0.0;  // decoupled slit, any phase is inert
    }
  }
  if (anchor >= 0) {
    const double shift = s.phis[anchor];
    for (int j = 0; j < d; ++j) {
      if (std::abs(target[j]) > 1e-12) s.phis[j] = wrap_2pi(s.phis[j] - shift);
    }
  }
  validate_settings(s);
  return s;
}

std::vector<CVec> settings_targets(const std::vector<LcdSettings>& settings) {
  std::vector<CVec> targets;
  targets.reserve(settings.size());
  for (const LcdSettings& s : settings) {
    const CVec a = kraus_diagonal(s, Outcome::H);
    CVec v(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) v[j] = std::conj(a[j]) / s.rescale_weight;
    targets.push_back(std::move(v));
  }
  return targets;
}

std::vector<double> fixed_point_probabilities(const DensityMatrix& rho,
                                              const std::vector<LcdSettings>& settings,
                                              const OpticalGeometry& geom, double z) {
  const int d = rho.dim;
  if (static_cast<int>(settings.size()) != d) {
    throw Error(ErrorCode::DimensionMismatch, "need exactly D settings");
  }

  // the settings must encode an orthonormal basis
  const std::vector<CVec> targets = settings_targets(settings);
  for (int l = 0; l < d; ++l) {
    const double dev = std::abs(norm2(targets[l]) - 1.0);
    if (dev > 1e-6) {
      throw Error(ErrorCode::NotOrthogonal,
                  "settings " + std::to_string(l + 1) + " do not encode a normalized projector",
                  dev);
    }
  }
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      const double ov = std::abs(inner(targets[a], targets[b]));
      if (ov > 1e-6) {
        throw Error(ErrorCode::NotOrthogonal,
                    "settings " + std::to_string(a + 1) + "," + std::to_string(b + 1) +
                        " encode non-orthogonal projectors",
                    ov);
      }
    }
  }

  std::vector<double> weights(d);
  double sum = 0.0;
  for (int l = 0; l < d; ++l) {
    const double m2 = settings[l].rescale_weight * settings[l].rescale_weight;
    weights[l] = total_density(rho, settings[l], geom, z) / m2;
    sum += weights[l];
  }
  if (sum <= 1e-300) {
    throw Error(ErrorCode::AllZero, "every outcome density underflows");
  }
  for (double& w : weights) w /= sum;
  return weights;
}

}  // namespace slitsim::povm
