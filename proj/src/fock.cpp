#include "pdcadd/fock.hpp"

#include "pdcadd/errors.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <sstream>

namespace pdcadd {

namespace {

[[noreturn]] void fock_error(ErrorCode code, const std::string& what) { throw Error(Stage::fock, code, what); }

// Untruncated distribution of one mode up to level `count - 1`, as
// amplitudes (pure states) or populations (thermal).
struct Distribution {
    std::vector<std::complex<double>> amp;  // empty for thermal
    std::vector<double> pop;
};

Distribution distribution(const ModeState& s, int count) {
    Distribution d;
    d.pop.assign(count, 0.0);
    switch (s.kind) {
    case ModeKind::vacuum:
        d.amp.assign(count, 0.0);
        d.amp[0] = 1.0;
        break;
    case ModeKind::coherent: {
        d.amp.assign(count, 0.0);
        std::complex<double> c = std::exp(-0.5 * std::norm(s.alpha));
        for (int n = 0; n < count; ++n) {
            d.amp[n] = c;
            c *= s.alpha / std::sqrt(double(n + 1));
        }
        break;
    }
    case ModeKind::thermal: {
        const double q = s.nbar / (1.0 + s.nbar);
        double p = 1.0 / (1.0 + s.nbar);
        for (int n = 0; n < count; ++n) {
            d.pop[n] = p;
            p *= q;
        }
        return d;
    }
    case ModeKind::squeezed_vacuum: {
        d.amp.assign(count, 0.0);
        const double t = std::tanh(s.squeeze);
        double c = 1.0 / std::sqrt(std::cosh(s.squeeze));
        for (int m = 0; 2 * m < count; ++m) {
            d.amp[2 * m] = c;
            c *= -t * std::sqrt(double(2 * m + 1) * (2 * m + 2)) / (2.0 * (m + 1));
        }
        break;
    }
    }
    for (int n = 0; n < count; ++n) d.pop[n] = std::norm(d.amp[n]);
    return d;
}

// population above n_max; thermal in closed form, otherwise summed until the
// terms are negligible past the peak
double tail_above(const ModeState& s, int n_max) {
    if (s.kind == ModeKind::vacuum) return 0.0;
    if (s.kind == ModeKind::thermal) return std::pow(s.nbar / (1.0 + s.nbar), n_max + 1);
    const double mean = s.mean_photons();
    int count = std::max(n_max + 64, static_cast<int>(8 * mean + 64));
    for (;;) {
        const Distribution d = distribution(s, count);
        double tail = 0.0;
        for (int n = n_max + 1; n < count; ++n) tail += d.pop[n];
        if (d.pop[count - 1] + d.pop[count - 2] < 1e-30 * std::max(tail, 1e-300) || count > 200000) return tail;
        count *= 2;
    }
}

void validate_mode(const ModeState& s) {
    if (s.kind == ModeKind::thermal && !(s.nbar >= 0.0)) fock_error(ErrorCode::invalid_config, "thermal nbar must be >= 0");
    if (s.kind == ModeKind::squeezed_vacuum && !(s.squeeze >= 0.0))
        fock_error(ErrorCode::invalid_config, "squeezing factor must be >= 0");
    if (s.kind == ModeKind::coherent && !std::isfinite(std::abs(s.alpha)))
        fock_error(ErrorCode::invalid_config, "coherent amplitude must be finite");
}

std::vector<int> occupation_table(const FockSpace& sp) {
    const int M = sp.modes();
    std::vector<int> occ(sp.dim() * M);
    for (long i = 0; i < sp.dim(); ++i)
        for (int m = 0; m < M; ++m) occ[i * M + m] = sp.occupation(i, m);
    return occ;
}

void check_channel(const FockDensityMatrix& rho, const AdditionChannel& ch) {
    if (ch.modes() != rho.mode_count()) {
        std::ostringstream os;
        os << "channel has " << ch.modes() << " eigenvalues, state has " << rho.mode_count() << " modes";
        fock_error(ErrorCode::mode_count_mismatch, os.str());
    }
    const auto& sp = rho.space;
    for (int m = 0; m < sp.modes(); ++m) {
        if (ch.eigenvalues[m] == 0.0) continue;
        double top = 0.0;
        for (long i = 0; i < sp.dim(); ++i)
            if (sp.occupation(i, m) == sp.truncation()[m]) top += rho.matrix(i, i).real();
        if (top >= 1e-8) {
            std::ostringstream os;
            os << "mode " << m << " holds population " << top << " at its top level " << sp.truncation()[m];
            fock_error(ErrorCode::truncation_overflow, os.str());
        }
    }
}

}  // namespace

FockSpace::FockSpace(std::vector<int> truncation) : trunc_(std::move(truncation)) {
    if (trunc_.empty()) fock_error(ErrorCode::invalid_config, "need at least one mode");
    stride_.assign(trunc_.size(), 1);
    dim_ = 1;
    for (int m = modes() - 1; m >= 0; --m) {
        if (trunc_[m] < 0) fock_error(ErrorCode::invalid_config, "truncation must be >= 0");
        stride_[m] = dim_;
        dim_ *= trunc_[m] + 1;
    }
    if (dim_ > 20000) fock_error(ErrorCode::invalid_config, "Fock space dimension " + std::to_string(dim_) + " too large");
}

FockSpace::FockSpace(int modes, int truncation) : FockSpace(std::vector<int>(std::max(modes, 0), truncation)) {}

long FockSpace::index(std::span<const int> occ) const {
    long i = 0;
    for (int m = 0; m < modes(); ++m) {
        if (occ[m] < 0 || occ[m] > trunc_[m]) fock_error(ErrorCode::invalid_config, "occupation outside truncation");
        i += occ[m] * stride_[m];
    }
    return i;
}

ValidityReport FockDensityMatrix::check() const {
    ValidityReport r;
    r.hermiticity = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    r.trace_error = std::abs(matrix.trace() - 1.0);
    const Eigen::MatrixXcd h = 0.5 * (matrix + matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    return r;
}

AdditionChannel::AdditionChannel(std::vector<double> lambda) : eigenvalues(std::move(lambda)) {
    double s = 0.0;
    for (double l : eigenvalues) {
        if (!(l >= 0.0) || !std::isfinite(l)) fock_error(ErrorCode::invalid_config, "channel eigenvalues must be >= 0");
        s += l;
    }
    if (!(s > 0.0)) fock_error(ErrorCode::invalid_config, "channel eigenvalues are all zero");
    for (double& l : eigenvalues) l /= s;
}

double ModeState::mean_photons() const {
    switch (kind) {
    case ModeKind::vacuum: return 0.0;
    case ModeKind::coherent: return std::norm(alpha);
    case ModeKind::thermal: return nbar;
    case ModeKind::squeezed_vacuum: return std::sinh(squeeze) * std::sinh(squeeze);
    }
    return 0.0;
}

SingleModeState single_mode_state(const ModeState& s, int n_max) {
    validate_mode(s);
    if (n_max < 0) fock_error(ErrorCode::invalid_config, "truncation must be >= 0");
    SingleModeState out;
    out.leak = tail_above(s, n_max);
    const Distribution d = distribution(s, n_max + 1);
    double kept = 0.0;
    for (double p : d.pop) kept += p;
    const int n = n_max + 1;
    if (d.amp.empty()) {
        out.rho = Eigen::MatrixXcd::Zero(n, n);
        for (int j = 0; j < n; ++j) out.rho(j, j) = d.pop[j] / kept;
    } else {
        Eigen::VectorXcd v(n);
        for (int j = 0; j < n; ++j) v[j] = d.amp[j];
        v /= std::sqrt(kept);
        out.rho = v * v.adjoint();
    }
    return out;
}

int adequate_truncation(const ModeState& s, double tol, bool headroom) {
    validate_mode(s);
    for (int n = 0; n < 100000; ++n) {
        if (tail_above(s, n) >= tol) continue;
        if (headroom && distribution(s, n + 1).pop[n] >= tol) continue;
        return n;
    }
    fock_error(ErrorCode::truncation_too_small, "no truncation below 100000 levels is adequate");
}

FockDensityMatrix build_input_state(const InputStateSpec& spec, std::vector<int> truncation) {
    if (spec.empty()) fock_error(ErrorCode::invalid_config, "input state needs at least one mode");
    if (truncation.size() != spec.size()) fock_error(ErrorCode::mode_count_mismatch, "one truncation per mode expected");
    FockDensityMatrix out;
    out.space = FockSpace(truncation);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Ones(1, 1);
    for (size_t m = 0; m < spec.size(); ++m) {
        const SingleModeState s = single_mode_state(spec[m], truncation[m]);
        if (s.leak >= 1e-8) {
            std::ostringstream os;
            os << "mode " << m << " leaks population " << s.leak << " above N_max = " << truncation[m];
            fock_error(ErrorCode::truncation_too_small, os.str());
        }
        rho = Eigen::kroneckerProduct(rho, s.rho).eval();
    }
    out.matrix = std::move(rho);
    return out;
}

FockDensityMatrix build_input_state(const InputStateSpec& spec, int truncation) {
    return build_input_state(spec, std::vector<int>(spec.size(), truncation));
}

FockDensityMatrix pure_state(const FockSpace& space, const Eigen::VectorXcd& psi) {
    if (psi.size() != space.dim()) fock_error(ErrorCode::mode_count_mismatch, "state vector does not match the space");
    const double n = psi.norm();
    if (!(n > 0.0)) fock_error(ErrorCode::invalid_config, "zero state vector");
    const Eigen::VectorXcd v = psi / n;
    return {space, v * v.adjoint()};
}

AdditionResult apply_addition(const FockDensityMatrix& rho, const AdditionChannel& ch) {
    check_channel(rho, ch);
    const auto& sp = rho.space;
    const long dim = sp.dim();
    const int M = sp.modes();
    const std::vector<int> occ = occupation_table(sp);
    std::vector<double> root(1 + *std::max_element(sp.truncation().begin(), sp.truncation().end()));
    for (size_t n = 0; n < root.size(); ++n) root[n] = std::sqrt(double(n));

    AdditionResult out;
    out.output.space = sp;
    out.output.matrix = Eigen::MatrixXcd::Zero(dim, dim);
    auto& dst = out.output.matrix;
    const auto& src = rho.matrix;
#pragma omp parallel for schedule(static)
    for (long j = 0; j < dim; ++j) {
        for (int m = 0; m < M; ++m) {
            const double l = ch.eigenvalues[m];
            const int oj = occ[j * M + m];
            if (l == 0.0 || oj == 0) continue;
            const long s = sp.stride(m);
            const double fj = l * root[oj];
            for (long i = 0; i < dim; ++i) {
                const int oi = occ[i * M + m];
                if (oi == 0) continue;
                dst(i, j) += fj * root[oi] * src(i - s, j - s);
            }
        }
    }
    out.probability = dst.trace().real();
    if (!(out.probability > 0.0)) fock_error(ErrorCode::invalid_config, "addition probability vanishes");
    dst /= out.probability;
    return out;
}

std::vector<double> mean_photon_numbers(const FockDensityMatrix& rho) {
    const auto& sp = rho.space;
    std::vector<double> n(sp.modes(), 0.0);
    for (long i = 0; i < sp.dim(); ++i) {
        const double p = rho.matrix(i, i).real();
        for (int m = 0; m < sp.modes(); ++m) n[m] += p * sp.occupation(i, m);
    }
    return n;
}

double purity(const FockDensityMatrix& rho) { return rho.matrix.cwiseAbs2().sum(); }

Eigen::VectorXcd apply_creation(const FockSpace& sp, const Eigen::VectorXcd& psi, int mode) {
    if (psi.size() != sp.dim()) fock_error(ErrorCode::mode_count_mismatch, "state vector does not match the space");
    if (mode < 0 || mode >= sp.modes()) fock_error(ErrorCode::mode_count_mismatch, "no such mode");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(sp.dim());
    const long s = sp.stride(mode);
    for (long i = 0; i < sp.dim(); ++i) {
        const int o = sp.occupation(i, mode);
        if (o == sp.truncation()[mode]) {
            if (std::abs(psi[i]) > 0.0)
                fock_error(ErrorCode::truncation_overflow, "creation pushes amplitude past the top level");
            continue;
        }
        out[i + s] = std::sqrt(double(o + 1)) * psi[i];
    }
    return out;
}

double cauchy_schwarz_gap(const FockSpace& sp, const Eigen::VectorXcd& psi, int k, int l) {
    const Eigen::VectorXcd v = psi / psi.norm();
    const Eigen::VectorXcd ak = apply_creation(sp, v, k), al = apply_creation(sp, v, l);
    return ak.squaredNorm() * al.squaredNorm() - std::norm(ak.dot(al));
}

double analytic_purity_two_mode(double q, double nbar) {
    if (std::isinf(q)) return 1.0;
    const double a = q * (1.0 + nbar);
    return (1.0 + a * a) / ((1.0 + a) * (1.0 + a));
}

double k_from_ratio(double q) {
    if (std::isinf(q)) return 1.0;
    return (1.0 + q) * (1.0 + q) / (1.0 + q * q);
}

double ratio_from_k(double K) {
    if (!(K >= 1.0 && K <= 2.0)) fock_error(ErrorCode::k_out_of_range, "K = " + std::to_string(K) + " outside [1, 2]");
    if (K == 1.0) return std::numeric_limits<double>::infinity();
    const double e = K - 1.0;
    return (1.0 + std::sqrt(std::max(0.0, 1.0 - e * e))) / e;
}

PuritySurface purity_surface(std::span<const double> ks, std::span<const double> ns) {
    PuritySurface out;
    out.k.assign(ks.begin(), ks.end());
    out.nbar.assign(ns.begin(), ns.end());
    for (double n : ns)
        if (!(n >= 0.0)) fock_error(ErrorCode::invalid_config, "nbar samples must be >= 0");
    out.purity.reserve(ks.size() * ns.size());
    for (double K : ks) {
        const double q = ratio_from_k(K);
        for (double n : ns) out.purity.push_back(analytic_purity_two_mode(q, n));
    }
    return out;
}

NonsaturationReport verify_nonsaturation(int trials, int modes, int truncation, std::uint64_t seed,
                                         const std::optional<AdditionChannel>& channel) {
    if (modes < 2) fock_error(ErrorCode::invalid_config, "nonsaturation needs M >= 2");
    if (trials < 1) fock_error(ErrorCode::invalid_config, "need at least one trial");
    if (truncation < 1) fock_error(ErrorCode::truncation_too_small, "need N_max >= 1 to add a photon");
    if (channel) {
        if (channel->modes() != modes) fock_error(ErrorCode::mode_count_mismatch, "channel size differs from M");
        if (std::count_if(channel->eigenvalues.begin(), channel->eigenvalues.end(), [](double l) { return l > 0.0; }) < 2)
            fock_error(ErrorCode::invalid_config, "channel needs at least two nonzero eigenvalues");
    }
    const FockSpace sp(modes, truncation);

    struct Trial {
        double purity, formula_error, cs_gap, cs_rel;
    };
    std::vector<Trial> res(trials);
    auto run_trial = [&](int t) {
        std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(t)};
        std::mt19937_64 rng(sq);
        std::normal_distribution<double> gauss;
        std::uniform_real_distribution<double> unif(1e-3, 1.0);

        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(sp.dim());
        for (long i = 0; i < sp.dim(); ++i) {
            bool inside = true;
            for (int m = 0; m < modes; ++m) inside = inside && sp.occupation(i, m) < truncation;
            if (inside) psi[i] = {gauss(rng), gauss(rng)};
        }
        psi.normalize();
        std::vector<double> lam(modes);
        for (double& l : lam) l = unif(rng);
        const AdditionChannel ch = channel ? *channel : AdditionChannel(lam);

        const AdditionResult r = apply_addition(pure_state(sp, psi), ch);
        const double p = purity(r.output);

        // Tr rho_out^2 = sum_kl l_k l_l |<a_k^+ psi|a_l^+ psi>|^2 / P^2
        std::vector<Eigen::VectorXcd> up(modes);
        for (int m = 0; m < modes; ++m) up[m] = apply_creation(sp, psi, m);
        double num = 0.0, P = 0.0, gap = std::numeric_limits<double>::infinity(), rel = gap;
        for (int k = 0; k < modes; ++k) {
            P += ch.eigenvalues[k] * up[k].squaredNorm();
            for (int l = 0; l < modes; ++l) {
                const double g2 = std::norm(up[k].dot(up[l]));
                num += ch.eigenvalues[k] * ch.eigenvalues[l] * g2;
                if (l > k) {
                    const double bound = up[k].squaredNorm() * up[l].squaredNorm();
                    gap = std::min(gap, bound - g2);
                    rel = std::min(rel, (bound - g2) / bound);
                }
            }
        }
        return Trial{p, std::abs(p - num / (P * P)), gap, rel};
    };

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) {
        try {
            res[t] = run_trial(t);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    NonsaturationReport rep;
    rep.trials = trials;
    rep.modes = modes;
    rep.truncation = truncation;
    rep.seed = seed;
    rep.min_purity_gap = rep.min_cs_gap = rep.min_cs_relative_gap = std::numeric_limits<double>::infinity();
    rep.all_mixed = true;
    for (const Trial& t : res) {
        rep.min_purity_gap = std::min(rep.min_purity_gap, 1.0 - t.purity);
        rep.max_purity = std::max(rep.max_purity, t.purity);
        rep.min_cs_gap = std::min(rep.min_cs_gap, t.cs_gap);
        rep.min_cs_relative_gap = std::min(rep.min_cs_relative_gap, t.cs_rel);
        rep.max_formula_error = std::max(rep.max_formula_error, t.formula_error);
        rep.all_mixed = rep.all_mixed && t.purity < 1.0 - 1e-9;
    }
    return rep;
}

namespace reference {

AdditionResult apply_addition_dense(const FockDensityMatrix& rho, const AdditionChannel& ch) {
    check_channel(rho, ch);
    const auto& sp = rho.space;
    const long dim = sp.dim();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    for (int m = 0; m < sp.modes(); ++m) {
        if (ch.eigenvalues[m] == 0.0) continue;
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(dim, dim);
        for (long i = 0; i < dim; ++i) {
            const int o = sp.occupation(i, m);
            if (o < sp.truncation()[m]) A(i + sp.stride(m), i) = std::sqrt(double(o + 1));
        }
        acc += ch.eigenvalues[m] * A * rho.matrix * A.adjoint();
    }
    AdditionResult out;
    out.probability = acc.trace().real();
    out.output = {sp, acc / out.probability};
    return out;
}

}  // namespace reference

}  // namespace pdcadd
