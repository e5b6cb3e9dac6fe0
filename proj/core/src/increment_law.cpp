#include "optstop/increment_law.hpp"

#include "optstop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace optstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logSumExp(const std::vector<double>& terms) {
    double m = -kInf;
    for (double t : terms) m = std::max(m, t);
    if (m == -kInf || std::isinf(m)) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

double normCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normPdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.141592653589793238462643); }

double logNormCdf(double z) {
    if (z > -8.0) return std::log(normCdf(z));
    // asymptotic tail: phi(z)/|z| * (1 - 1/z^2 + ...)
    return -0.5 * z * z - std::log(-z) - 0.5 * std::log(2.0 * 3.141592653589793238462643);
}

double poissonLogPmf(long k, double rate) {
    return static_cast<double>(k) * std::log(rate) - rate - std::lgamma(static_cast<double>(k) + 1.0);
}

} // namespace

// ---------------------------------------------------------------------------
// JumpLaw

JumpLaw JumpLaw::constant(double value) {
    if (!std::isfinite(value)) throw PreconditionViolation("stochastic", "constant jump must be finite");
    JumpLaw j;
    j.family_ = Family::Constant;
    j.a_ = value;
    return j;
}

JumpLaw JumpLaw::uniform(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw PreconditionViolation("stochastic", "uniform jump needs lo < hi, both finite");
    JumpLaw j;
    j.family_ = Family::Uniform;
    j.a_ = lo;
    j.b_ = hi;
    return j;
}

JumpLaw JumpLaw::exponential(double rate) {
    if (!(rate > 0.0)) throw PreconditionViolation("stochastic", "exponential jump rate must be positive");
    JumpLaw j;
    j.family_ = Family::Exponential;
    j.a_ = rate;
    return j;
}

JumpLaw JumpLaw::lattice(double step, std::vector<std::pair<double, double>> atoms) {
    if (!(step > 0.0)) throw PreconditionViolation("stochastic", "lattice step must be positive");
    double total = 0.0;
    for (auto& [v, p] : atoms) {
        if (p < 0.0) throw PreconditionViolation("stochastic", "jump probabilities must be nonnegative");
        const double ratio = v / step;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw PreconditionViolation("stochastic", "jump values must be integer multiples of the step");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw PreconditionViolation("stochastic", "jump probabilities must sum to 1 within 1e-12");
    JumpLaw j;
    j.family_ = Family::Lattice;
    j.a_ = step;
    std::sort(atoms.begin(), atoms.end());
    j.atoms_ = std::move(atoms);
    return j;
}

double JumpLaw::mean() const {
    switch (family_) {
    case Family::Constant: return a_;
    case Family::Uniform: return 0.5 * (a_ + b_);
    case Family::Exponential: return 1.0 / a_;
    case Family::Lattice: {
        double m = 0.0;
        for (const auto& [v, p] : atoms_) m += v * p;
        return m;
    }
    }
    return 0.0;
}

double JumpLaw::logMgf(double lambda) const {
    switch (family_) {
    case Family::Constant:
        return lambda * a_;
    case Family::Uniform: {
        if (lambda == 0.0) return 0.0;
        const double w = b_ - a_;
        // E e^{λJ} = e^{λb} (1 - e^{-λw}) / (λ w)
        return lambda * b_ + std::log(-std::expm1(-lambda * w)) - std::log(lambda * w);
    }
    case Family::Exponential:
        return lambda < a_ ? -std::log1p(-lambda / a_) : kInf;
    case Family::Lattice: {
        std::vector<double> terms;
        terms.reserve(atoms_.size());
        for (const auto& [v, p] : atoms_)
            if (p > 0.0) terms.push_back(std::log(p) + lambda * v);
        return logSumExp(terms);
    }
    }
    return kInf;
}

double JumpLaw::mgfDomainMax() const {
    return family_ == Family::Exponential ? a_ : kInf;
}

double JumpLaw::supSupport() const {
    switch (family_) {
    case Family::Constant: return a_;
    case Family::Uniform: return b_;
    case Family::Exponential: return kInf;
    case Family::Lattice: return atoms_.empty() ? -kInf : atoms_.back().first;
    }
    return -kInf;
}

bool JumpLaw::hasPositivePart() const {
    switch (family_) {
    case Family::Constant: return a_ > 0.0;
    case Family::Uniform: return b_ > 0.0;
    case Family::Exponential: return true;
    case Family::Lattice:
        for (const auto& [v, p] : atoms_)
            if (v > 0.0 && p > 0.0) return true;
        return false;
    }
    return false;
}

double JumpLaw::draw(Rng& rng) const {
    switch (family_) {
    case Family::Constant: return a_;
    case Family::Uniform: return a_ + (b_ - a_) * rng.u01();
    case Family::Exponential: return rng.exponential(a_);
    case Family::Lattice: {
        double u = rng.u01();
        for (const auto& [v, p] : atoms_) {
            if (u < p) return v;
            u -= p;
        }
        return atoms_.back().first;
    }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// IncrementLaw

namespace {

// P(J > t)
double jumpTailProb(const JumpLaw& j, double t) {
    switch (j.family()) {
    case JumpLaw::Family::Constant: return j.paramA() > t ? 1.0 : 0.0;
    case JumpLaw::Family::Uniform: {
        if (t <= j.paramA()) return 1.0;
        if (t >= j.paramB()) return 0.0;
        return (j.paramB() - t) / (j.paramB() - j.paramA());
    }
    case JumpLaw::Family::Exponential: return t <= 0.0 ? 1.0 : std::exp(-j.paramA() * t);
    case JumpLaw::Family::Lattice: {
        double s = 0.0;
        for (const auto& [v, p] : j.atoms())
            if (v > t) s += p;
        return s;
    }
    }
    return 0.0;
}

} // namespace

void IncrementLaw::finalizeLattice() {
    std::map<std::int64_t, double> merged;
    for (const auto& a : atoms_) merged[a.k] += a.p;
    atoms_.clear();
    for (const auto& [k, p] : merged)
        if (p > 0.0) atoms_.push_back({k, p});
    if (atoms_.empty()) throw DegenerateLaw("lattice law has no mass");

    mean_ = 0.0;
    upMass_ = 0.0;
    for (const auto& a : atoms_) {
        mean_ += static_cast<double>(a.k) * step_ * a.p;
        if (a.k > 0) upMass_ += a.p;
    }
    if (!(upMass_ > 0.0)) throw DegenerateLaw("law must place positive mass above zero");
    maxIncrement_ = static_cast<double>(atoms_.back().k) * step_;
    mgfDomainMax_ = kInf;
}

IncrementLaw IncrementLaw::lattice(double step, const std::vector<std::pair<double, double>>& atoms) {
    if (!(step > 0.0)) throw PreconditionViolation("stochastic", "lattice step must be positive");
    double total = 0.0;
    IncrementLaw law;
    law.lattice_ = true;
    law.step_ = step;
    for (const auto& [v, p] : atoms) {
        if (p < 0.0) throw PreconditionViolation("stochastic", "probabilities must be nonnegative");
        const double ratio = v / step;
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-9)
            throw PreconditionViolation("stochastic", "atom values must be integer multiples of the step");
        law.atoms_.push_back({static_cast<std::int64_t>(rounded), p});
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw PreconditionViolation("stochastic", "probabilities must sum to 1 within 1e-12");
    law.finalizeLattice();
    std::ostringstream os;
    os << "lattice(step=" << step << ", " << law.atoms_.size() << " atoms)";
    law.description_ = os.str();
    return law;
}

IncrementLaw IncrementLaw::gaussian(double mean, double sigma) {
    if (!(sigma > 0.0)) throw PreconditionViolation("stochastic", "gaussian sigma must be positive");
    IncrementLaw law;
    law.lattice_ = false;
    law.drift_ = mean;
    law.sigma_ = sigma;
    law.mean_ = mean;
    law.upMass_ = normCdf(mean / sigma);
    law.maxIncrement_ = kInf;
    law.mgfDomainMax_ = kInf;
    law.logMgf_ = [mean, sigma](double lam) { return mean * lam + 0.5 * sigma * sigma * lam * lam; };
    law.draw_ = [mean, sigma](Rng& rng) { return mean + sigma * rng.normal(); };
    std::ostringstream os;
    os << "gaussian(mean=" << mean << ", sigma=" << sigma << ")";
    law.description_ = os.str();
    return law;
}

IncrementLaw IncrementLaw::jumpDiffusionStep(double drift, double sigma, double rate,
                                             std::optional<JumpLaw> jump) {
    if (sigma < 0.0) throw PreconditionViolation("stochastic", "sigma must be nonnegative");
    if (rate < 0.0) throw PreconditionViolation("stochastic", "jump rate must be nonnegative");
    if (rate > 0.0 && !jump) throw PreconditionViolation("stochastic", "positive rate needs a jump law");
    if (rate == 0.0) jump.reset();

    IncrementLaw law;
    law.lattice_ = false;
    law.drift_ = drift;
    law.sigma_ = sigma;
    law.rate_ = rate;
    law.jump_ = jump;
    law.mean_ = drift + (jump ? rate * jump->mean() : 0.0);
    law.mgfDomainMax_ = jump ? jump->mgfDomainMax() : kInf;

    // positive lower bound on P(increment > 0)
    if (sigma > 0.0) {
        law.upMass_ = std::exp(-rate) * normCdf(drift / sigma);
    } else if (drift > 0.0) {
        law.upMass_ = std::exp(-rate);
    } else {
        const bool canRise = jump && jump->hasPositivePart();
        if (!canRise) throw DegenerateLaw("law must place positive mass above zero");
        const double sup = jump->supSupport();
        if (sup == kInf) {
            law.upMass_ = rate * std::exp(-rate) * jumpTailProb(*jump, -drift);
        } else {
            const long k = static_cast<long>(std::floor(-drift / sup)) + 1;
            const double margin = static_cast<double>(k) * sup + drift; // > 0
            const double threshold = sup - margin / (2.0 * k);
            const double tail = jumpTailProb(*jump, threshold);
            law.upMass_ = std::exp(poissonLogPmf(k, rate) + static_cast<double>(k) * std::log(std::max(tail, 1e-300)));
            if (!(tail > 0.0)) throw DegenerateLaw("law must place positive mass above zero");
        }
    }

    law.maxIncrement_ = (sigma > 0.0 || (jump && jump->hasPositivePart())) ? kInf
                        : drift; // no upward channel beyond the drift itself
    const JumpLaw jumpCopy = jump ? *jump : JumpLaw::constant(0.0);
    const bool hasJump = jump.has_value();
    law.logMgf_ = [drift, sigma, rate, jumpCopy, hasJump](double lam) {
        double v = drift * lam + 0.5 * sigma * sigma * lam * lam;
        if (hasJump) {
            const double lj = jumpCopy.logMgf(lam);
            if (std::isinf(lj)) return kInf;
            v += rate * std::expm1(lj);
        }
        return v;
    };
    law.draw_ = [drift, sigma, rate, jumpCopy, hasJump](Rng& rng) {
        double x = drift;
        if (sigma > 0.0) x += sigma * rng.normal();
        if (hasJump) {
            const long n = rng.poisson(rate);
            for (long i = 0; i < n; ++i) x += jumpCopy.draw(rng);
        }
        return x;
    };
    std::ostringstream os;
    os << "step(drift=" << drift << ", sigma=" << sigma << ", rate=" << rate << ")";
    law.description_ = os.str();
    return law;
}

IncrementLaw IncrementLaw::sampler(std::function<double(Rng&)> draw, double mean,
                                   std::function<double(double)> logMgf, double mgfDomainMax,
                                   double upMass, std::string description) {
    if (!draw) throw PreconditionViolation("stochastic", "sampler needs a draw procedure");
    if (!(upMass > 0.0)) throw DegenerateLaw("law must place positive mass above zero");
    IncrementLaw law;
    law.lattice_ = false;
    law.draw_ = std::move(draw);
    law.logMgf_ = std::move(logMgf);
    law.mean_ = mean;
    law.upMass_ = upMass;
    law.maxIncrement_ = kInf;
    law.mgfDomainMax_ = law.logMgf_ ? mgfDomainMax : 0.0;
    law.description_ = std::move(description);
    return law;
}

std::int64_t IncrementLaw::maxStepCount() const {
    if (!lattice_) throw PreconditionViolation("stochastic", "lattice-only query");
    return atoms_.back().k;
}

std::int64_t IncrementLaw::minStepCount() const {
    if (!lattice_) throw PreconditionViolation("stochastic", "lattice-only query");
    return atoms_.front().k;
}

bool IncrementLaw::skipFreeUp() const { return lattice_ && atoms_.back().k == 1; }

double IncrementLaw::logMgf(double lambda) const {
    if (lambda < 0.0) throw PreconditionViolation("stochastic", "MGF is evaluated at lambda >= 0");
    if (lambda == 0.0) return 0.0;
    if (lattice_) {
        std::vector<double> terms;
        terms.reserve(atoms_.size());
        for (const auto& a : atoms_) terms.push_back(std::log(a.p) + lambda * static_cast<double>(a.k) * step_);
        return logSumExp(terms);
    }
    if (!logMgf_ || lambda > mgfDomainMax_) return kInf;
    return logMgf_(lambda);
}

double IncrementLaw::mgf(double lambda) const {
    const double l = logMgf(lambda);
    return std::isinf(l) ? kInf : std::exp(l);
}

std::optional<double> IncrementLaw::mgfRoot(double q) const {
    if (q < 0.0) throw PreconditionViolation("stochastic", "discount exponent must be nonnegative");
    const double dom = mgfDomainMax_;
    if (dom <= 0.0) return q == 0.0 ? std::optional<double>(0.0) : std::nullopt;

    const auto L = [&](double lam) { return logMgf(lam); };
    const double tol = 1e-10;

    // search for hi with L(hi) > q
    const auto findUpperBracket = [&](double start) -> std::optional<double> {
        double x = std::isinf(dom) ? start : std::min(start, 0.5 * dom);
        if (std::isinf(dom)) {
            for (int i = 0; i < 80; ++i) {
                if (L(x) > q) return x;
                x *= 2.0;
            }
            return std::nullopt;
        }
        for (int i = 0; i < 200; ++i) {
            if (L(x) > q) return x;
            const double gap = dom - x;
            if (gap < 1e-13 * std::max(1.0, dom)) return std::nullopt;
            x = dom - 0.5 * gap;
        }
        return std::nullopt;
    };

    double lo, hi;
    if (q == 0.0) {
        if (!(mean_ < 0.0)) return 0.0; // convex log-MGF rising from 0: only the trivial root
        lo = std::min(1e-6, 0.5 * dom);
        int guard = 0;
        while (L(lo) >= 0.0 && ++guard < 60) lo *= 0.5;
        if (L(lo) >= 0.0) return 0.0;
        const auto bracket = findUpperBracket(std::max(2.0 * lo, 1e-3));
        if (!bracket) return 0.0; // never returns to 1 inside the domain
        hi = *bracket;
    } else {
        lo = 0.0; // L(0) = 0 < q
        const auto bracket = findUpperBracket(1.0);
        if (!bracket) return std::nullopt;
        hi = *bracket;
    }

    for (int i = 0; i < 200 && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (L(mid) > q)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double IncrementLaw::draw(Rng& rng) const {
    if (lattice_) return static_cast<double>(drawStep(rng)) * step_;
    return draw_(rng);
}

std::int64_t IncrementLaw::drawStep(Rng& rng) const {
    if (!lattice_) throw PreconditionViolation("stochastic", "lattice-only query");
    double u = rng.u01();
    for (const auto& a : atoms_) {
        if (u < a.p) return a.k;
        u -= a.p;
    }
    return atoms_.back().k;
}

IncrementLaw IncrementLaw::truncateJumps(double cap) const {
    if (lattice_) {
        const double ratio = cap / step_;
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-9)
            throw Unsupported("stochastic", "truncation cap must be a lattice point");
        const auto kk = static_cast<std::int64_t>(rounded);
        IncrementLaw law;
        law.lattice_ = true;
        law.step_ = step_;
        for (const auto& a : atoms_) law.atoms_.push_back({std::min(a.k, kk), a.p});
        law.finalizeLattice(); // throws DegenerateLaw when the cap destroys the upward mass
        std::ostringstream os;
        os << description_ << " capped at " << cap;
        law.description_ = os.str();
        return law;
    }
    if (sigma_ > 0.0 && rate_ == 0.0) {
        // min(N(m, s^2), cap) has closed-form mean and MGF
        if (cap <= 0.0) throw DegenerateLaw("cap at or below zero destroys the upward mass");
        const double m = drift_, s = sigma_, c = cap;
        IncrementLaw law;
        law.lattice_ = false;
        const double zc = (c - m) / s;
        law.mean_ = m * normCdf(zc) - s * normPdf(zc) + c * (1.0 - normCdf(zc));
        law.upMass_ = normCdf(m / s); // positive part unchanged when cap > 0
        law.maxIncrement_ = c;
        law.mgfDomainMax_ = kInf;
        law.logMgf_ = [m, s, c](double lam) {
            const double body = m * lam + 0.5 * s * s * lam * lam + logNormCdf((c - m - lam * s * s) / s);
            const double atom = lam * c + logNormCdf(-(c - m) / s);
            return logSumExp({body, atom});
        };
        law.draw_ = [m, s, c](Rng& rng) { return std::min(m + s * rng.normal(), c); };
        std::ostringstream os;
        os << description_ << " capped at " << cap;
        law.description_ = os.str();
        return law;
    }
    throw Unsupported("stochastic", "jump truncation is implemented for lattice and Gaussian laws");
}

} // namespace optstop
