#include "htql/asymptotics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "htql/parallel.hpp"
#include "htql/quadrature.hpp"
#include "htql/rng.hpp"

namespace htql {

namespace {

// Substream tags so every estimator draws from its own family of keys.
constexpr std::uint64_t kStreamPj0 = 0xA110C8ED00000001ULL;
constexpr std::uint64_t kStreamKappa = 0xA110C8ED00000002ULL;
constexpr std::uint64_t kStreamSet = 0xA110C8ED00000003ULL;

struct ChunkMoments {
    double sum = 0.0;
    double sum_sq = 0.0;
};

// mean and standard error of a per-sample statistic accumulated in chunks.
std::pair<double, double> combine_moments(const std::vector<ChunkMoments>& slots,
                                          std::uint64_t n) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& s : slots) {
        sum += s.sum;
        sum_sq += s.sum_sq;
    }
    double mean = sum / static_cast<double>(n);
    double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
    double se = n > 1 ? std::sqrt(var / static_cast<double>(n)) : 0.0;
    return {mean, se};
}

void require_level(double x) {
    if (!(x >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument("level x must be nonnegative and finite");
}

std::uint32_t full_mask(std::size_t n) {
    if (n > static_cast<std::size_t>(kMaxEnumerationFlows)) {
        std::ostringstream os;
        os << "reduced system has " << n << " flows; partition masks support at most "
           << kMaxEnumerationFlows;
        throw TooManyFlows(os.str());
    }
    return (1u << n) - 1u;
}

// Shared description of one P_J0 evaluation.
struct Pj0Problem {
    std::vector<const OnOffFlow*> j0;
    std::vector<const OnOffFlow*> j1;
    std::vector<double> theta;  // r_j - rho_j for J_1, same order as j1
    double drift;               // r - c
    double x;
    double front_factor;        // 1 / prod_{i in J_1} E{A_i}

    double integrand(const double* y) const {
        double coupled = 0.0;
        for (std::size_t k = 0; k < theta.size(); ++k) coupled += y[k] * theta[k];
        double v = 1.0;
        for (std::size_t k = 0; k < j1.size(); ++k) {
            v *= j1[k]->on().tail((coupled - drift * y[k] + x) / drift);
            if (v == 0.0) return 0.0;
        }
        for (const OnOffFlow* f : j0) {
            v *= f->on().residual_tail((coupled + x) / drift);
            if (v == 0.0) return 0.0;
        }
        return v;
    }
};

Pj0Problem make_problem(const ReducedSystem& rs, std::uint32_t j0_mask, double x) {
    Pj0Problem p;
    p.drift = rs.drift();
    p.x = x;
    p.front_factor = 1.0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const OnOffFlow& f = rs.flows()[i];
        if (j0_mask & (1u << i)) {
            p.j0.push_back(&f);
        } else {
            p.j1.push_back(&f);
            p.theta.push_back(f.peak_minus_mean());
            p.front_factor /= f.on().mean();
        }
    }
    return p;
}

ValueEstimate pj0_quadrature(const Pj0Problem& p, const EstimatorOptions& opts) {
    std::vector<double> scales;
    scales.reserve(p.j1.size());
    for (std::size_t k = 0; k < p.j1.size(); ++k)
        scales.push_back((p.x + p.drift * p.j1[k]->on().mean()) / (p.theta[k] - p.drift));
    auto q = integrate_positive_orthant([&p](const double* y) { return p.integrand(y); },
                                        scales, opts.quadrature_rel_tol);
    ValueEstimate est;
    est.value = p.front_factor * q.value;
    est.std_error = std::max(p.front_factor * q.error, std::abs(est.value) * 1e-15);
    est.method = EstimateMethod::quadrature;
    est.samples = static_cast<std::uint64_t>(q.evaluations);
    return est;
}

// Importance sampling with per-dimension Lomax proposals. Shape nu_k - 1
// keeps the weight f/q bounded (the integrand decays at least like the
// k-th On tail along y_k) while the second moment stays finite.
ValueEstimate pj0_monte_carlo(const Pj0Problem& p, const EstimatorOptions& opts) {
    const std::size_t d = p.j1.size();
    std::vector<double> shape(d), scale(d);
    std::vector<std::uint64_t> key(d);
    for (std::size_t k = 0; k < d; ++k) {
        shape[k] = p.j1[k]->tail_index() - 1.0;
        scale[k] = (p.x + p.drift * p.j1[k]->on().mean()) / (p.theta[k] - p.drift);
        key[k] = rng_key(opts.seed, kStreamPj0, k);
    }

    auto grid = chunk_grid(opts.samples);
    std::vector<ChunkMoments> slots(grid.chunks);
    for_each_chunk(
        grid,
        [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
            ChunkMoments m;
            std::vector<double> y(d);
            for (std::uint64_t n = begin; n < end; ++n) {
                double density = 1.0;
                for (std::size_t k = 0; k < d; ++k) {
                    double u = u64_to_open_unit(rng_word(key[k], n));
                    double yk = scale[k] * (std::pow(u, -1.0 / shape[k]) - 1.0);
                    y[k] = yk;
                    density *= shape[k] / scale[k] *
                               std::pow(1.0 + yk / scale[k], -shape[k] - 1.0);
                }
                // density > 0 for any realizable draw unless several very
                // heavy dimensions underflow at once; there the integrand
                // vanishes too, so dropping the point is exact.
                double w = density > 0.0 ? p.integrand(y.data()) / density : 0.0;
                m.sum += w;
                m.sum_sq += w * w;
            }
            slots[c] = m;
        },
        opts.threads);

    auto [mean, se] = combine_moments(slots, opts.samples);
    ValueEstimate est;
    est.value = p.front_factor * mean;
    est.std_error = p.front_factor * se;
    est.method = EstimateMethod::monte_carlo;
    est.samples = opts.samples;
    return est;
}

// Limit-variable context for the kappa constants: g_j = (r_j - rho_j)/(r-c),
// Z_i with tail (1 + y (r-c))^(1-nu_i), independent across all of J.
//
// Where the numbers come from: substituting z = (G - I) y in the defining
// integral, with G the square matrix whose rows all equal g restricted to
// J_1, turns the coupled tail product into independent residual overshoots.
// det(G - I) = eg - 1 (eg = sum of g over J_1) supplies the 1/(eg - 1)
// front factor, and (G - I)^-1 = G/(eg - 1) - I maps the J_0 conditions to
// Z_i >= g.Z_{J_1}/(eg - 1). The matrices themselves never need to be
// materialized.
struct KappaContext {
    std::size_t n;
    double gamma;
    std::vector<double> g;
    std::vector<double> inv_one_minus_nu;
    std::vector<std::uint64_t> key;
    bool exchangeable;
};

KappaContext make_kappa_context(const ReducedSystem& rs, std::uint64_t seed) {
    KappaContext ctx;
    ctx.n = rs.size();
    ctx.gamma = 1.0 / rs.drift();
    ctx.exchangeable = true;
    for (std::size_t i = 0; i < ctx.n; ++i) {
        const OnOffFlow& f = rs.flows()[i];
        ctx.g.push_back(f.peak_minus_mean() / rs.drift());
        ctx.inv_one_minus_nu.push_back(1.0 / (1.0 - f.tail_index()));
        ctx.key.push_back(rng_key(seed, kStreamKappa, i));
        if (!(f == rs.flows()[0])) ctx.exchangeable = false;
    }
    return ctx;
}

double z_sample(const KappaContext& ctx, std::size_t i, std::uint64_t sample) {
    double u = u64_to_open_unit(rng_word(ctx.key[i], sample));
    return ctx.gamma * (std::pow(u, ctx.inv_one_minus_nu[i]) - 1.0);
}

ValueEstimate closed(double v) {
    return ValueEstimate{v, 0.0, EstimateMethod::closed_form, 0};
}

double binomial_coefficient(std::size_t n, std::size_t k) {
    double v = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        v = v * static_cast<double>(n - k + i) / static_cast<double>(i);
    return v;
}

} // namespace

double single_flow_tail(const OnOffFlow& flow, double c, double x) {
    require_level(x);
    if (!(c > flow.mean_rate() + kRateTolerance) || !(c < flow.peak_rate() - kRateTolerance)) {
        std::ostringstream os;
        os << "capacity " << c << " outside (" << flow.mean_rate() << ", " << flow.peak_rate()
           << ")";
        throw RateOrder(os.str());
    }
    double p = flow.on_fraction();
    double rho = flow.mean_rate();
    return (1.0 - p) * rho / (c - rho) * flow.on().residual_tail(x / (flow.peak_rate() - c));
}

double instantaneous_flow_tail(const InstantFlow& flow, double c, double x) {
    require_level(x);
    if (!(c > flow.mean_rate() + kRateTolerance)) {
        std::ostringstream os;
        os << "capacity " << c << " <= mean rate " << flow.mean_rate();
        throw RateOrder(os.str());
    }
    double rho = flow.mean_rate();
    return rho / (c - rho) * flow.burst().residual_tail(x);
}

ValueEstimate p_j0_value(const ReducedSystem& rs, std::uint32_t j0_mask, double x,
                         PJ0Method method, const EstimatorOptions& opts) {
    require_level(x);
    std::uint32_t full = full_mask(rs.size());
    if ((j0_mask & ~full) != 0) throw BadPartition("J_0 contains flows outside the reduced system");

    if (j0_mask == full) {
        // J_1 empty: the integral degenerates to the plain product.
        double v = 1.0;
        for (const auto& f : rs.flows()) v *= f.on().residual_tail(x / rs.drift());
        return closed(v);
    }
    if (rs.size() == 1 && j0_mask == 0 && method == PJ0Method::automatic) {
        // An explicit method request still runs the 1-d integral machinery,
        // which the closed form cross-checks in the tests.
        const auto& f = rs.flows()[0];
        double v = rs.drift() / (rs.capacity() - f.mean_rate()) *
                   f.on().residual_tail(x / rs.drift());
        return closed(v);
    }

    Pj0Problem p = make_problem(rs, j0_mask, x);
    bool use_quadrature =
        method == PJ0Method::quadrature ||
        (method == PJ0Method::automatic &&
         static_cast<int>(p.j1.size()) <= opts.quadrature_dim_cutoff);
    if (use_quadrature && p.j1.size() > 3)
        throw std::invalid_argument("quadrature path supports |J_1| <= 3");
    return use_quadrature ? pj0_quadrature(p, opts) : pj0_monte_carlo(p, opts);
}

ValueEstimate kappa_j0(const ReducedSystem& rs, std::uint32_t j0_mask,
                       const EstimatorOptions& opts) {
    std::uint32_t full = full_mask(rs.size());
    if ((j0_mask & ~full) != 0) throw BadPartition("J_0 contains flows outside the reduced system");
    if (j0_mask == full) return closed(1.0);

    KappaContext ctx = make_kappa_context(rs, opts.seed);
    double eg = 0.0;
    for (std::size_t i = 0; i < ctx.n; ++i)
        if (!(j0_mask & (1u << i))) eg += ctx.g[i];
    double t = 1.0 / (eg - 1.0);
    if (j0_mask == 0) return closed(t);

    auto grid = chunk_grid(opts.samples);
    std::vector<ChunkMoments> slots(grid.chunks);
    for_each_chunk(
        grid,
        [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
            ChunkMoments m;
            for (std::uint64_t s = begin; s < end; ++s) {
                double threshold = 0.0;
                for (std::size_t i = 0; i < ctx.n; ++i)
                    if (!(j0_mask & (1u << i))) threshold += ctx.g[i] * z_sample(ctx, i, s);
                threshold *= t;
                bool all = true;
                for (std::size_t i = 0; i < ctx.n && all; ++i)
                    if (j0_mask & (1u << i)) all = z_sample(ctx, i, s) >= threshold;
                double v = all ? t : 0.0;
                m.sum += v;
                m.sum_sq += v * v;
            }
            slots[c] = m;
        },
        opts.threads);

    auto [mean, se] = combine_moments(slots, opts.samples);
    return ValueEstimate{mean, se, EstimateMethod::monte_carlo, opts.samples};
}

ValueEstimate kappa_total(const ReducedSystem& rs, const EstimatorOptions& opts) {
    const std::size_t n = rs.size();
    (void)full_mask(n);  // enforce the partition-enumeration limit
    KappaContext ctx = make_kappa_context(rs, opts.seed);
    double eg_all = 0.0;
    for (double gi : ctx.g) eg_all += gi;
    double t_empty = 1.0 / (eg_all - 1.0);

    if (n == 1) return closed(1.0 + t_empty);

    if (!ctx.exchangeable && n > 12)
        throw TooManyFlows("kappa_total enumerates 2^N partitions; 12 heterogeneous flows max");

    auto grid = chunk_grid(opts.samples);
    std::vector<ChunkMoments> slots(grid.chunks);

    if (ctx.exchangeable) {
        // Identical flows: every partition of size k has the same kappa, so
        // one representative per size weighted by C(N, k) suffices.
        double g = ctx.g[0];
        std::vector<double> t_by_size(n), binom(n);
        for (std::size_t k = 1; k < n; ++k) {
            t_by_size[k] = 1.0 / (static_cast<double>(n - k) * g - 1.0);
            binom[k] = binomial_coefficient(n, k);
        }
        for_each_chunk(
            grid,
            [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
                ChunkMoments m;
                std::vector<double> z(n);
                for (std::uint64_t s = begin; s < end; ++s) {
                    for (std::size_t i = 0; i < n; ++i) z[i] = z_sample(ctx, i, s);
                    double suffix = 0.0;
                    for (double zi : z) suffix += zi;
                    double prefix_min = z[0];
                    double contrib = 0.0;
                    for (std::size_t k = 1; k < n; ++k) {
                        suffix -= z[k - 1];
                        if (k > 1) prefix_min = std::min(prefix_min, z[k - 1]);
                        if (prefix_min >= t_by_size[k] * g * suffix)
                            contrib += binom[k] * t_by_size[k];
                    }
                    m.sum += contrib;
                    m.sum_sq += contrib * contrib;
                }
                slots[c] = m;
            },
            opts.threads);
    } else {
        const std::uint32_t count = 1u << n;
        std::vector<double> t_mask(count);
        std::vector<double> g_sum(count, 0.0);
        for (std::uint32_t m = 1; m < count; ++m) {
            std::uint32_t low = m & (~m + 1u);
            g_sum[m] = g_sum[m ^ low] + ctx.g[static_cast<std::size_t>(std::countr_zero(low))];
        }
        for (std::uint32_t m = 0; m + 1 < count; ++m) t_mask[m] = 1.0 / (eg_all - g_sum[m] - 1.0);
        for_each_chunk(
            grid,
            [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
                ChunkMoments mm;
                std::vector<double> z(n), gz(count), zmin(count);
                for (std::uint64_t s = begin; s < end; ++s) {
                    for (std::size_t i = 0; i < n; ++i) z[i] = z_sample(ctx, i, s);
                    double w_all = 0.0;
                    for (std::size_t i = 0; i < n; ++i) w_all += ctx.g[i] * z[i];
                    double contrib = 0.0;
                    for (std::uint32_t m = 1; m + 1 < count; ++m) {
                        std::uint32_t low = m & (~m + 1u);
                        std::size_t bit = static_cast<std::size_t>(std::countr_zero(low));
                        gz[m] = gz[m ^ low] + ctx.g[bit] * z[bit];
                        zmin[m] = m == low ? z[bit] : std::min(zmin[m ^ low], z[bit]);
                        if (zmin[m] >= t_mask[m] * (w_all - gz[m])) contrib += t_mask[m];
                    }
                    mm.sum += contrib;
                    mm.sum_sq += contrib * contrib;
                }
                slots[c] = mm;
            },
            opts.threads);
    }

    auto [mean, se] = combine_moments(slots, opts.samples);
    return ValueEstimate{1.0 + t_empty + mean, se, EstimateMethod::monte_carlo, opts.samples};
}

double reduced_tail_prefactor(const ReducedSystem& rs, double x) {
    require_level(x);
    double v = 1.0;
    for (const auto& f : rs.flows())
        v *= f.on_fraction() * f.on().residual_tail(x / rs.drift());
    return v;
}

ValueEstimate reduced_system_tail(const ReducedSystem& rs, double x,
                                  const EstimatorOptions& opts) {
    return reduced_system_tail(rs, x, kappa_total(rs, opts));
}

ValueEstimate reduced_system_tail(const ReducedSystem& rs, double x,
                                  const ValueEstimate& kappa) {
    double pref = reduced_tail_prefactor(rs, x);
    return ValueEstimate{kappa.value * pref, kappa.std_error * pref, kappa.method, kappa.samples};
}

TailBoundsResult tail_bounds(std::span<const OnOffFlow> flows, double c, double x) {
    require_level(x);
    if (flows.empty()) throw std::invalid_argument("tail bounds need at least one flow");
    double r = 0.0, min_theta = std::numeric_limits<double>::infinity();
    for (const auto& f : flows) {
        r += f.peak_rate();
        min_theta = std::min(min_theta, f.peak_minus_mean());
    }
    if (!(c < r - kRateTolerance)) {
        std::ostringstream os;
        os << "capacity " << c << " >= aggregate peak " << r << "; no lower bound applies";
        throw RateOrder(os.str());
    }
    TailBoundsResult b;
    b.lower = 1.0;
    for (const auto& f : flows)
        b.lower *= f.on_fraction() * f.on().residual_tail(x / (r - c));
    if (c > r - min_theta + kRateTolerance) {
        double big_k = 1.0;
        for (const auto& f : flows)
            big_k *= f.peak_minus_mean() / (f.peak_minus_mean() + c - r);
        b.amplification = big_k;
        b.upper = big_k * b.lower;
    }
    return b;
}

WorkloadAnalysis::WorkloadAnalysis(const SystemSpec& sys, const EstimatorOptions& opts)
    : validation_(validate_system(sys)), report_(dominant_sets(validation_.normalized)),
      opts_(opts) {
    const SystemSpec& norm = validation_.normalized;
    double total_mean = norm.total_mean_rate();
    for (const auto& subset : report_.dominant) {
        std::vector<OnOffFlow> flows;
        double mean_s = 0.0;
        std::uint32_t mask = 0;
        for (int idx : subset) {
            flows.push_back(norm.heavy_flows[static_cast<std::size_t>(idx)]);
            mean_s += flows.back().mean_rate();
            mask |= 1u << idx;
        }
        double c_s = 1.0 - (total_mean - mean_s);
        reduced_.emplace_back(std::move(flows), c_s);
        EstimatorOptions per_set = opts_;
        per_set.seed = rng_key(opts_.seed, kStreamSet, mask);
        kappas_.push_back(kappa_total(reduced_.back(), per_set));
    }
}

WorkloadTailResult WorkloadAnalysis::tail(double x) const {
    require_level(x);
    const SystemSpec& norm = validation_.normalized;
    double xn = x / validation_.scale;
    WorkloadTailResult out;
    out.exponent = report_.exponent;
    double var = 0.0;
    for (std::size_t k = 0; k < reduced_.size(); ++k) {
        ValueEstimate term = reduced_system_tail(reduced_[k], xn, kappas_[k]);
        TailTerm t;
        t.instantaneous = false;
        t.flows = report_.dominant[k];
        t.reduced_capacity = reduced_[k].capacity();
        t.kappa = kappas_[k];
        t.value = term.value;
        out.terms.push_back(std::move(t));
        out.value += term.value;
        var += term.std_error * term.std_error;
    }
    double total_mean = norm.total_mean_rate();
    for (int idx : report_.dominant_instants) {
        const InstantFlow& f = norm.instant_flows[static_cast<std::size_t>(idx)];
        double c_i = 1.0 - (total_mean - f.mean_rate());
        TailTerm t;
        t.instantaneous = true;
        t.flows = {idx};
        t.reduced_capacity = c_i;
        t.kappa = ValueEstimate{1.0, 0.0, EstimateMethod::closed_form, 0};
        t.value = instantaneous_flow_tail(f, c_i, xn);
        out.value += t.value;
        out.terms.push_back(std::move(t));
    }
    out.std_error = std::sqrt(var);
    return out;
}

TailBoundsResult WorkloadAnalysis::bounds(double x) const {
    if (reduced_.empty())
        throw RateOrder("no dominant On-Off set; Lemma 4.1/4.2 bounds do not apply");
    double xn = x / validation_.scale;
    TailBoundsResult out;
    double upper_sum = 0.0;
    bool have_all_uppers = true;
    for (const auto& rs : reduced_) {
        auto b = tail_bounds(rs.flows(), rs.capacity(), xn);
        out.lower = std::max(out.lower, b.lower);
        if (b.upper && have_all_uppers) {
            upper_sum += *b.upper;
            if (!out.amplification || *b.amplification > *out.amplification)
                out.amplification = b.amplification;
        } else {
            have_all_uppers = false;
        }
    }
    if (have_all_uppers) out.upper = upper_sum;
    return out;
}

WorkloadTailResult workload_tail(const SystemSpec& sys, double x, const EstimatorOptions& opts) {
    return WorkloadAnalysis(sys, opts).tail(x);
}

TailCurve make_tail_curve(const WorkloadAnalysis& analysis, std::span<const double> levels,
                          std::string digest) {
    TailCurve curve;
    curve.system_digest = std::move(digest);
    curve.exponent = analysis.exponent();
    const auto& report = analysis.report();
    if (report.dominant.empty())
        curve.theorem = "instantaneous dominance";
    else if (!report.dominant_instants.empty())
        curve.theorem = "weakly dominant sets + instantaneous input";
    else if (report.dominant.size() > 1)
        curve.theorem = "weakly dominant sets";
    else
        curve.theorem = "reduced-load equivalence";
    double prev_x = -1.0;
    for (double x : levels) {
        if (!(x > prev_x)) throw std::invalid_argument("tail-curve grid must be increasing");
        prev_x = x;
        curve.points.push_back(TailCurvePoint{x, analysis.tail(x).value});
    }
    return curve;
}

} // namespace htql
