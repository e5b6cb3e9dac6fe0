#pragma once

#include "optstop/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace optstop {

/// Jump-size distribution for the compound-Poisson part of a step law.
class JumpLaw {
public:
    enum class Family { Constant, Uniform, Exponential, Lattice };

    static JumpLaw constant(double value);
    static JumpLaw uniform(double lo, double hi);
    static JumpLaw exponential(double rate); // support (0, inf), mean 1/rate
    static JumpLaw lattice(double step, std::vector<std::pair<double, double>> atoms);

    double mean() const;
    double logMgf(double lambda) const; // +inf outside the finiteness domain
    double mgfDomainMax() const;        // sup{lambda : E exp(lambda J) < inf}
    double supSupport() const;          // +inf when unbounded above
    bool hasPositivePart() const;       // P(J > 0) > 0
    double draw(Rng& rng) const;

    Family family() const { return family_; }
    double paramA() const { return a_; }
    double paramB() const { return b_; }
    const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }
    double step() const { return a_; }

private:
    Family family_ = Family::Constant;
    double a_ = 0.0, b_ = 0.0;
    std::vector<std::pair<double, double>> atoms_; // (value, prob)
};

struct LatticeAtom {
    std::int64_t k; // increment = k * step
    double p;
};

/// One-step distribution of the driving walk. Two modes:
///   - Lattice: finite support on step * Z, exact arithmetic downstream;
///   - Sampler: a seeded draw plus a declared mean and analytic log-MGF.
/// Standing requirement: P(increment > 0) > 0.
class IncrementLaw {
public:
    /// atoms are (value, probability); values must be integer multiples of
    /// step, probabilities must sum to 1 within 1e-12.
    static IncrementLaw lattice(double step, const std::vector<std::pair<double, double>>& atoms);

    static IncrementLaw gaussian(double mean, double sigma);

    /// Law of drift + sigma N(0,1) + sum of Poisson(rate) draws from `jump`.
    /// Parameters are per step; scale them by the step length beforehand.
    static IncrementLaw jumpDiffusionStep(double drift, double sigma, double rate,
                                          std::optional<JumpLaw> jump);

    /// Escape hatch for laws outside the curated families. mgfDomainMax = 0
    /// declares that no moment generating function is available.
    static IncrementLaw sampler(std::function<double(Rng&)> draw, double mean,
                                std::function<double(double)> logMgf, double mgfDomainMax,
                                double upMass, std::string description = "sampler");

    bool isLattice() const { return lattice_; }
    double step() const { return step_; }
    const std::vector<LatticeAtom>& atoms() const { return atoms_; }
    std::int64_t maxStepCount() const; // largest k with mass (lattice)
    std::int64_t minStepCount() const;
    /// Only up-steps of one lattice unit: upward passages cannot overshoot.
    bool skipFreeUp() const;

    double mean() const { return mean_; }
    /// P(increment > 0): exact for lattice and Gaussian, a positive lower
    /// bound for compound laws (sufficient for the standing assumption).
    double upMass() const { return upMass_; }
    /// sup of the support; +inf for unbounded families.
    double maxIncrement() const { return maxIncrement_; }

    double logMgf(double lambda) const;
    double mgf(double lambda) const;
    double mgfDomainMax() const { return mgfDomainMax_; }

    /// Largest nonnegative root of mgf(lambda) = e^q within the finiteness
    /// domain, found by convexity-aware bracketing and bisection to 1e-10.
    /// nullopt when the equation has no nonnegative root in the domain.
    std::optional<double> mgfRoot(double q) const;

    double draw(Rng& rng) const;

    /// Lattice mode: one step in units of the lattice (exact integer
    /// arithmetic keeps simulated paths on the lattice bit for bit).
    std::int64_t drawStep(Rng& rng) const;

    /// Law of min(increment, cap); mass above the cap collapses onto it.
    /// Requires P(min(increment, cap) > 0) > 0.
    IncrementLaw truncateJumps(double cap) const;

    const std::string& describe() const { return description_; }

    // Sampler-family parameters for serialization.
    double samplerDrift() const { return drift_; }
    double samplerSigma() const { return sigma_; }
    double samplerRate() const { return rate_; }
    const std::optional<JumpLaw>& samplerJump() const { return jump_; }

private:
    IncrementLaw() = default;
    void finalizeLattice();

    bool lattice_ = false;
    double step_ = 1.0;
    std::vector<LatticeAtom> atoms_;

    // sampler mode
    std::function<double(Rng&)> draw_;
    std::function<double(double)> logMgf_;
    double drift_ = 0.0, sigma_ = 0.0, rate_ = 0.0;
    std::optional<JumpLaw> jump_;

    double mean_ = 0.0;
    double upMass_ = 0.0;
    double maxIncrement_ = 0.0;
    double mgfDomainMax_ = 0.0;
    std::string description_;
};

} // namespace optstop
