#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "denseleaf/dataset.hpp"
#include "denseleaf/grid_density.hpp"
#include "denseleaf/quadrature.hpp"
#include "denseleaf/rng.hpp"

namespace denseleaf {

// ---------------------------------------------------------------------------
// Conditional densities

//! Mixing: f(x_c | x_p) = x_p h(x_c) + (1-x_p) h(1-x_c), base on [0,1].
//! Shifting: f(x_c | x_p) = h(max(x_c - x_p/4, 0)), base on [0,3/4] with
//! h(0) = 0 so the conditional integrates to one.
struct ConditionalDensity {
  enum class Kind { Mixing, Shifting };
  Kind kind = Kind::Mixing;
  GridDensity1D base;

  double eval(double x_child, double x_parent) const {
    if (x_child < 0.0 || x_child > 1.0 || x_parent < 0.0 || x_parent > 1.0)
      throw std::invalid_argument("ConditionalDensity: arguments outside [0,1]");
    if (kind == Kind::Mixing)
      return x_parent * base.pdf(x_child) + (1.0 - x_parent) * base.pdf(1.0 - x_child);
    return base.pdf(std::max(x_child - 0.25 * x_parent, 0.0));
  }

  double sample(double x_parent, Rng& rng) const {
    if (kind == Kind::Mixing) {
      const bool direct = rng.uniform() < x_parent;
      const double z = base.quantile(rng.uniform());
      return direct ? z : 1.0 - z;
    }
    return base.quantile(rng.uniform()) + 0.25 * x_parent;
  }

  void check_invariants() const {
    if (kind == Kind::Mixing) {
      if (base.support_hi != 1.0)
        throw std::invalid_argument("Mixing base must live on [0,1]");
    } else {
      if (base.support_hi != 0.75)
        throw std::invalid_argument("Shifting base must live on [0,3/4]");
      if (base.values.front() != 0.0)
        throw std::invalid_argument("Shifting base must vanish at 0");
    }
  }
};

// ---------------------------------------------------------------------------
// DAG-factorized joints

struct DagDensityModel {
  enum class DagKind { NaiveBayes, BinaryTree };
  int dim = 0;
  DagKind dag_kind = DagKind::NaiveBayes;
  GridDensity1D root;
  std::vector<ConditionalDensity> conditionals;  // nodes 2..d in order

  //! 1-based parent of node j >= 2.
  int parent(int j) const {
    return dag_kind == DagKind::NaiveBayes ? 1 : (j - 1 + 1) / 2;
  }

  double eval_joint(const double* x) const {
    double v = root.pdf(x[0]);
    for (int j = 2; j <= dim; ++j)
      v *= conditionals[j - 2].eval(x[j - 1], x[parent(j) - 1]);
    return v;
  }

  //! Ancestral sampling; parents always precede children in index order.
  void sample_row(double* x, Rng& rng) const {
    x[0] = root.quantile(rng.uniform());
    for (int j = 2; j <= dim; ++j)
      x[j - 1] = conditionals[j - 2].sample(x[parent(j) - 1], rng);
  }
};

// ---------------------------------------------------------------------------
// FGM D-vine copula model

//! c_theta(u,v) = 1 + theta (1-2u)(1-2v); nonnegative for |theta| <= 1.
inline double fgm_pair_density(double u, double v, double theta) {
  if (std::abs(theta) > 1.0) throw std::invalid_argument("fgm_pair_density: |theta| > 1");
  return 1.0 + theta * (1.0 - 2.0 * u) * (1.0 - 2.0 * v);
}

//! theta = -1 + 2(i-1)/(d-2) for edge i, except 1/100 when the formula
//! would give 0.
inline double theta_for_edge(int i, int d) {
  if (d < 3) throw std::invalid_argument("theta_for_edge: d must be >= 3");
  if (i < 1 || i > d - 1) throw std::invalid_argument("theta_for_edge: edge index out of range");
  if (2 * (i - 1) == d - 2) return 0.01;
  return -1.0 + 2.0 * static_cast<double>(i - 1) / static_cast<double>(d - 2);
}

//! Inverse of the FGM h-function v -> v(1 + a(1-v)) with a = theta(1-2u):
//! the root in [0,1] of a v^2 - (1+a) v + w = 0, in the cancellation-free
//! form 2w / (1+a+sqrt((1+a)^2-4aw)); near a = 0 the inverse is w itself.
inline double fgm_h_inverse(double w, double u, double theta) {
  const double a = theta * (1.0 - 2.0 * u);
  if (std::abs(a) < 1e-12) return w;
  const double b = 1.0 + a;
  const double disc = std::max(0.0, b * b - 4.0 * a * w);
  return 2.0 * w / (b + std::sqrt(disc));
}

//! Marginal used in the copula model; piecewise closed form whose
//! smoothness is driven by the square roots. Values stay within
//! [1 - 1/(2d), 1 + 1/(2d)].
inline double vine_marginal_pdf(double x, int d) {
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("vine_marginal_pdf: x outside [0,1]");
  const double invd = 1.0 / static_cast<double>(d);
  if (x < 0.25) return 1.0 + 0.5 * invd - invd * std::sqrt(0.25 - x);
  if (x < 0.5) return 1.0 + 0.5 * invd - invd * std::sqrt(x - 0.25);
  if (x < 0.75) return 1.0 - 0.5 * invd + invd * std::sqrt(0.75 - x);
  return 1.0 - 0.5 * invd + invd * std::sqrt(x - 0.75);
}

//! Piecewise antiderivative of vine_marginal_pdf; continuous and strictly
//! increasing with F(0)=0, F(1)=1.
inline double vine_marginal_cdf(double x, int d) {
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("vine_marginal_cdf: x outside [0,1]");
  const double invd = 1.0 / static_cast<double>(d);
  const double a = 1.0 + 0.5 * invd;   // slope constant on [0, 1/2)
  const double b = 1.0 - 0.5 * invd;   // slope constant on [1/2, 1]
  const double c23 = 2.0 / 3.0 * invd;
  const double f14 = 0.25 * a - c23 * 0.125;          // F(1/4), (1/4)^{3/2} = 1/8
  const double f12 = f14 + 0.25 * a - c23 * 0.125;    // F(1/2)
  const double f34 = f12 + 0.25 * b + c23 * 0.125;    // F(3/4)
  if (x < 0.25) return a * x + c23 * (std::pow(0.25 - x, 1.5) - 0.125);
  if (x < 0.5) return f14 + a * (x - 0.25) - c23 * std::pow(x - 0.25, 1.5);
  if (x < 0.75) return f12 + b * (x - 0.5) - c23 * (std::pow(0.75 - x, 1.5) - 0.125);
  return f34 + b * (x - 0.75) + c23 * std::pow(x - 0.75, 1.5);
}

//! Inverse of vine_marginal_cdf by bracketed bisection to 1e-12 within the
//! monotone piece, then two Newton polish steps.
inline double vine_marginal_quantile(double u, int d) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (double edge : {0.25, 0.5, 0.75}) {
    const double fe = vine_marginal_cdf(edge, d);
    if (fe <= u) lo = edge; else { hi = edge; break; }
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (vine_marginal_cdf(mid, d) <= u) lo = mid; else hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 2; ++it) {
    const double fx = vine_marginal_cdf(x, d) - u;
    const double dfx = vine_marginal_pdf(x, d);
    const double step = fx / dfx;
    const double next = x - step;
    if (next > 0.0 && next < 1.0) x = next;
  }
  return x;
}

//! D-vine with only first-tree dependence: a Markov chain in the uniform
//! scale. Density: prod_k f_k(x_k) * prod_i c_{theta_i}(F(x_i), F(x_{i+1})).
struct VineCopulaDensity {
  int dim = 0;  // >= 3
  std::vector<double> thetas;  // d-1 edge parameters

  static VineCopulaDensity make(int d) {
    if (d < 3) throw std::invalid_argument("VineCopulaDensity: d must be >= 3");
    VineCopulaDensity v;
    v.dim = d;
    for (int i = 1; i <= d - 1; ++i) v.thetas.push_back(theta_for_edge(i, d));
    return v;
  }

  double eval_joint(const double* x) const {
    double val = 1.0;
    double u_prev = 0.0;
    for (int k = 0; k < dim; ++k) {
      val *= vine_marginal_pdf(x[k], dim);
      const double u = vine_marginal_cdf(x[k], dim);
      if (k > 0) val *= fgm_pair_density(u_prev, u, thetas[k - 1]);
      u_prev = u;
    }
    return val;
  }

  void sample_row(double* x, Rng& rng) const {
    double u = rng.uniform();
    x[0] = vine_marginal_quantile(u, dim);
    for (int i = 0; i + 1 < dim; ++i) {
      u = fgm_h_inverse(rng.uniform(), u, thetas[i]);
      x[i + 1] = vine_marginal_quantile(u, dim);
    }
  }
};

// ---------------------------------------------------------------------------
// Independent products and mixtures

//! Product of independent 1D marginals; also the truth model for the
//! bias/variance theory checks.
struct ProductDensity {
  std::vector<GridDensity1D> marginals;

  int dim() const { return static_cast<int>(marginals.size()); }
  double eval_joint(const double* x) const {
    double v = 1.0;
    for (std::size_t r = 0; r < marginals.size(); ++r) v *= marginals[r].pdf(x[r]);
    return v;
  }
  void sample_row(double* x, Rng& rng) const {
    for (std::size_t r = 0; r < marginals.size(); ++r)
      x[r] = marginals[r].quantile(rng.uniform());
  }
};

struct DensityModel;

struct MixtureDensity {
  std::vector<double> weights;
  std::vector<std::shared_ptr<const DensityModel>> components;
};

//! Evaluable + sampleable joint density on [0,1]^d.
struct DensityModel {
  std::variant<GridDensity1D, ProductDensity, DagDensityModel, VineCopulaDensity,
               MixtureDensity>
      model;
  std::string tag;
  std::uint64_t seed = 0;
  int resolution = 0;

  int dim() const;
  double eval(const double* x) const;
  double eval(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim())
      throw std::invalid_argument("DensityModel::eval: dimension mismatch");
    return eval(x.data());
  }
  void sample_row(double* x, Rng& rng) const;

  Dataset sample(std::size_t n, std::uint64_t sample_seed) const {
    if (n < 1) throw std::invalid_argument("DensityModel::sample: n must be >= 1");
    Dataset data;
    data.dim = dim();
    data.seed = sample_seed;
    data.model_tag = tag;
    data.points.resize(n * data.dim);
    Rng rng(sample_seed);
    for (std::size_t i = 0; i < n; ++i) sample_row(data.points.data() + i * data.dim, rng);
    return data;
  }
};

inline int DensityModel::dim() const {
  if (std::holds_alternative<GridDensity1D>(model)) return 1;
  if (const auto* p = std::get_if<ProductDensity>(&model)) return p->dim();
  if (const auto* p = std::get_if<DagDensityModel>(&model)) return p->dim;
  if (const auto* p = std::get_if<VineCopulaDensity>(&model)) return p->dim;
  const auto& mix = std::get<MixtureDensity>(model);
  return mix.components.front()->dim();
}

inline double DensityModel::eval(const double* x) const {
  if (const auto* g = std::get_if<GridDensity1D>(&model)) return g->pdf(x[0]);
  if (const auto* p = std::get_if<ProductDensity>(&model)) return p->eval_joint(x);
  if (const auto* p = std::get_if<DagDensityModel>(&model)) return p->eval_joint(x);
  if (const auto* p = std::get_if<VineCopulaDensity>(&model)) return p->eval_joint(x);
  const auto& mix = std::get<MixtureDensity>(model);
  double v = 0.0;
  for (std::size_t j = 0; j < mix.weights.size(); ++j)
    v += mix.weights[j] * mix.components[j]->eval(x);
  return v;
}

inline void DensityModel::sample_row(double* x, Rng& rng) const {
  if (const auto* g = std::get_if<GridDensity1D>(&model)) {
    x[0] = g->quantile(rng.uniform());
    return;
  }
  if (const auto* p = std::get_if<ProductDensity>(&model)) return p->sample_row(x, rng);
  if (const auto* p = std::get_if<DagDensityModel>(&model)) return p->sample_row(x, rng);
  if (const auto* p = std::get_if<VineCopulaDensity>(&model)) return p->sample_row(x, rng);
  const auto& mix = std::get<MixtureDensity>(model);
  const std::size_t j = rng.categorical(mix.weights);
  mix.components[j]->sample_row(x, rng);
}

inline DensityModel make_mixture(std::vector<double> weights,
                                 std::vector<std::shared_ptr<const DensityModel>> comps,
                                 std::string tag = "mixture") {
  if (weights.size() != comps.size() || comps.empty())
    throw std::invalid_argument("make_mixture: weights/components mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("make_mixture: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("make_mixture: weights must sum to 1");
  const int d = comps.front()->dim();
  for (const auto& c : comps)
    if (c->dim() != d) throw std::invalid_argument("make_mixture: dimension mismatch");
  MixtureDensity mix{std::move(weights), std::move(comps)};
  DensityModel m;
  m.model = std::move(mix);
  m.tag = std::move(tag);
  return m;
}

// ---------------------------------------------------------------------------
// Simulation-suite construction

//! Which node indices are shifting conditionals / carry rough bases. Both
//! rules follow the source construction literally and stay configurable
//! because their interplay is underdetermined there.
struct DagModelOptions {
  enum class IndexRule { JDivisibleBy3, JMinus1DivisibleBy3 };
  int resolution = 4096;
  IndexRule shifting_rule = IndexRule::JDivisibleBy3;
  IndexRule rough_rule = IndexRule::JMinus1DivisibleBy3;

  static bool applies(IndexRule rule, int j) {
    return rule == IndexRule::JDivisibleBy3 ? (j % 3 == 0) : ((j - 1) % 3 == 0);
  }
};

//! Families: NBm, NBs, BTm, BTs, C. The trailing m/s selects all-mixing vs
//! mixed shifting conditionals; C is the FGM D-vine.
inline DensityModel make_model(const std::string& family, int d, std::uint64_t seed,
                               DagModelOptions opts = {}) {
  DensityModel m;
  m.tag = family;
  m.seed = seed;
  m.resolution = opts.resolution;
  if (family == "C") {
    m.model = VineCopulaDensity::make(d);
    return m;
  }
  if (family != "NBm" && family != "NBs" && family != "BTm" && family != "BTs")
    throw std::invalid_argument("make_model: unknown family " + family);
  if (d < 1) throw std::invalid_argument("make_model: d must be positive");
  // d = 1 degenerates to the root density alone.
  const bool s_variant = family.back() == 's';
  DagDensityModel dag;
  dag.dim = d;
  dag.dag_kind = (family[0] == 'N') ? DagDensityModel::DagKind::NaiveBayes
                                    : DagDensityModel::DagKind::BinaryTree;
  dag.root = make_expbm_density(seed_mix(seed, "root"), opts.resolution, false);
  for (int j = 2; j <= d; ++j) {
    ConditionalDensity cond;
    const bool shifting = s_variant && DagModelOptions::applies(opts.shifting_rule, j);
    const bool rough = DagModelOptions::applies(opts.rough_rule, j);
    cond.kind = shifting ? ConditionalDensity::Kind::Shifting
                         : ConditionalDensity::Kind::Mixing;
    const std::uint64_t cond_seed = seed_mix(seed_mix(seed, "cond"), static_cast<std::uint64_t>(j));
    if (shifting) {
      cond.base = rough ? make_expbm_density(cond_seed, opts.resolution, true)
                        : make_rho_density(opts.resolution);
    } else if (rough) {
      cond.base = s_variant
                      ? embed_to_unit(make_expbm_density(cond_seed, opts.resolution, true))
                      : make_expbm_density(cond_seed, opts.resolution, false);
    } else {
      cond.base = make_linear_hj(d, opts.resolution);
    }
    cond.check_invariants();
    dag.conditionals.push_back(std::move(cond));
  }
  m.model = std::move(dag);
  return m;
}

//! Descriptor round-trip: {family, d, seed, resolution}; mixtures carry
//! weights and component descriptors.
inline nlohmann::json model_descriptor(const DensityModel& m) {
  nlohmann::json j;
  if (const auto* mix = std::get_if<MixtureDensity>(&m.model)) {
    j["family"] = "mixture";
    j["d"] = m.dim();
    j["seed"] = m.seed;
    j["resolution"] = m.resolution;
    j["weights"] = mix->weights;
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : mix->components) comps.push_back(model_descriptor(*c));
    j["components"] = comps;
    return j;
  }
  j["family"] = m.tag;
  j["d"] = m.dim();
  j["seed"] = m.seed;
  j["resolution"] = m.resolution;
  return j;
}

inline DensityModel model_from_descriptor(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  const int d = j.at("d").get<int>();
  const std::uint64_t seed = j.value("seed", 0ull);
  DagModelOptions opts;
  opts.resolution = j.value("resolution", 4096);
  if (opts.resolution == 0) opts.resolution = 4096;
  if (family == "mixture") {
    std::vector<double> weights = j.at("weights").get<std::vector<double>>();
    std::vector<std::shared_ptr<const DensityModel>> comps;
    for (const auto& cj : j.at("components"))
      comps.push_back(std::make_shared<DensityModel>(model_from_descriptor(cj)));
    DensityModel m = make_mixture(std::move(weights), std::move(comps));
    m.seed = seed;
    m.resolution = opts.resolution;
    return m;
  }
  return make_model(family, d, seed, opts);
}

// ---------------------------------------------------------------------------
// Tensor quadrature over [0,1]^d (d <= 3)

//! Integrates the joint over [0,1]^d with a composite Gauss-Legendre grid,
//! panels_per_axis panels per axis. DAG joints are piecewise polynomial on
//! the density grid, so panel counts matching the grid resolution make the
//! rule exact up to rounding.
inline double joint_mass(const DensityModel& m, int panels_per_axis, int gl_points = 2) {
  const int d = m.dim();
  if (d > 3) throw std::invalid_argument("joint_mass: d > 3 not supported");
  const QuadRule rule = gauss_legendre(gl_points);
  const int P = panels_per_axis;
  const int G = P * gl_points;
  std::vector<double> nodes(G), weights(G);
  const double w = 1.0 / P;
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < gl_points; ++q) {
      nodes[p * gl_points + q] = (p + 0.5 * (1.0 + rule.nodes[q])) * w;
      weights[p * gl_points + q] = 0.5 * w * rule.weights[q];
    }
  double total = 0.0;
  double x[3];
  if (d == 1) {
    for (int i = 0; i < G; ++i) {
      x[0] = nodes[i];
      total += weights[i] * m.eval(x);
    }
    return total;
  }
  if (d == 2) {
    for (int i = 0; i < G; ++i) {
      x[0] = nodes[i];
      double inner = 0.0;
      for (int j = 0; j < G; ++j) {
        x[1] = nodes[j];
        inner += weights[j] * m.eval(x);
      }
      total += weights[i] * inner;
    }
    return total;
  }
  for (int i = 0; i < G; ++i) {
    x[0] = nodes[i];
    for (int j = 0; j < G; ++j) {
      x[1] = nodes[j];
      double inner = 0.0;
      for (int k = 0; k < G; ++k) {
        x[2] = nodes[k];
        inner += weights[k] * m.eval(x);
      }
      total += weights[i] * weights[j] * inner;
    }
  }
  return total;
}

//! Per-cell masses of the joint on a bins^d tensor grid (d <= 3), row-major
//! with the last axis fastest. sub_panels subdivides each cell per axis.
inline std::vector<double> cell_masses(const DensityModel& m, int bins,
                                       int sub_panels = 1, int gl_points = 3) {
  const int d = m.dim();
  if (d > 3) throw std::invalid_argument("cell_masses: d > 3 not supported");
  const QuadRule rule = gauss_legendre(gl_points);
  const int P = bins * sub_panels;
  const int G = P * gl_points;
  std::vector<double> nodes(G), weights(G);
  const double w = 1.0 / P;
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < gl_points; ++q) {
      nodes[p * gl_points + q] = (p + 0.5 * (1.0 + rule.nodes[q])) * w;
      weights[p * gl_points + q] = 0.5 * w * rule.weights[q];
    }
  auto cell_of = [&](int g) { return g / (sub_panels * gl_points); };
  std::vector<double> cells(static_cast<std::size_t>(std::pow(bins, d)), 0.0);
  double x[3];
  if (d == 1) {
    for (int i = 0; i < G; ++i) {
      x[0] = nodes[i];
      cells[cell_of(i)] += weights[i] * m.eval(x);
    }
    return cells;
  }
  if (d == 2) {
    for (int i = 0; i < G; ++i) {
      x[0] = nodes[i];
      for (int j = 0; j < G; ++j) {
        x[1] = nodes[j];
        cells[cell_of(i) * bins + cell_of(j)] += weights[i] * weights[j] * m.eval(x);
      }
    }
    return cells;
  }
  for (int i = 0; i < G; ++i) {
    x[0] = nodes[i];
    for (int j = 0; j < G; ++j) {
      x[1] = nodes[j];
      const std::size_t base = (static_cast<std::size_t>(cell_of(i)) * bins + cell_of(j)) * bins;
      for (int k = 0; k < G; ++k) {
        x[2] = nodes[k];
        cells[base + cell_of(k)] += weights[i] * weights[j] * weights[k] * m.eval(x);
      }
    }
  }
  return cells;
}

}  // namespace denseleaf
