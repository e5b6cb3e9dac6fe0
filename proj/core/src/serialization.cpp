#include "optstop/serialization.hpp"

#include "json_codec.hpp"
#include "optstop/errors.hpp"

#include <cmath>
#include <limits>

namespace optstop::codec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double requireNumber(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw SchemaError(std::string("missing or non-numeric field '") + key + "'");
    return j[key].get<double>();
}

std::string requireString(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string())
        throw SchemaError(std::string("missing or non-string field '") + key + "'");
    return j[key].get<std::string>();
}

} // namespace

json encodeFinite(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    if (std::isnan(v)) return nullptr;
    return v;
}

double decodeFinite(const json& j, const char* what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    throw SchemaError(std::string("expected a number or inf marker for ") + what);
}

json rewardToJson(const RewardFunction& f) {
    json j;
    switch (f.kind()) {
    case RewardKind::PowerPlus:
        j["kind"] = "power_plus";
        j["nu"] = f.paramA();
        break;
    case RewardKind::ExpCall:
        j["kind"] = "exp_call";
        j["strike"] = f.paramA();
        break;
    case RewardKind::ExpPut:
        j["kind"] = "exp_put";
        j["strike"] = f.paramA();
        break;
    case RewardKind::Indicator:
        j["kind"] = "indicator";
        j["edge"] = f.paramA();
        break;
    case RewardKind::ExpLinear:
        j["kind"] = "exp_linear";
        j["intercept"] = f.paramA();
        j["slope"] = f.paramB();
        break;
    case RewardKind::PiecewiseLogLinear:
        j["kind"] = "piecewise_log_linear";
        j["breakpoints"] = f.breakpoints();
        j["slopes"] = f.slopes();
        j["anchor_x"] = f.anchorX();
        j["anchor_logvalue"] = f.anchorLogValue();
        j["x0"] = encodeFinite(f.leftEdge());
        break;
    case RewardKind::Custom:
        throw Unsupported("cli", "custom rewards are runtime-only and do not serialize");
    }
    if (f.cap()) j["cap"] = *f.cap();
    if (f.logScaleFactor() != 0.0) j["scale"] = std::exp(f.logScaleFactor());
    return j;
}

RewardFunction rewardFromJson(const json& j) {
    if (!j.is_object()) throw SchemaError("reward must be a JSON object");
    const std::string kind = requireString(j, "kind");
    auto build = [&]() -> RewardFunction {
        if (kind == "power_plus") return RewardFunction::powerPlus(requireNumber(j, "nu"));
        if (kind == "exp_call") return RewardFunction::expCall(requireNumber(j, "strike"));
        if (kind == "exp_put") return RewardFunction::expPut(requireNumber(j, "strike"));
        if (kind == "indicator") return RewardFunction::indicator(requireNumber(j, "edge"));
        if (kind == "exp_linear")
            return RewardFunction::expLinear(requireNumber(j, "intercept"), requireNumber(j, "slope"));
        if (kind == "piecewise_log_linear") {
            if (!j.contains("breakpoints") || !j["breakpoints"].is_array() ||
                !j.contains("slopes") || !j["slopes"].is_array())
                throw SchemaError("piecewise reward needs 'breakpoints' and 'slopes' arrays");
            std::vector<double> bps = j["breakpoints"].get<std::vector<double>>();
            std::vector<double> slopes = j["slopes"].get<std::vector<double>>();
            std::optional<double> edge;
            if (j.contains("x0") && !j["x0"].is_null()) {
                const double x0 = decodeFinite(j["x0"], "x0");
                if (std::isfinite(x0)) edge = x0;
                else if (x0 == kInf) throw SchemaError("x0 cannot be +inf");
            }
            return RewardFunction::piecewiseLogLinear(std::move(bps), std::move(slopes),
                                                      requireNumber(j, "anchor_x"),
                                                      requireNumber(j, "anchor_logvalue"), edge);
        }
        throw SchemaError("unknown reward kind '" + kind + "'");
    };
    RewardFunction f = build();
    if (j.contains("cap")) f = f.truncateAbove(requireNumber(j, "cap"));
    if (j.contains("scale")) f = f.scaled(requireNumber(j, "scale"));
    return f;
}

json jumpToJson(const JumpLaw& jl) {
    json j;
    switch (jl.family()) {
    case JumpLaw::Family::Constant:
        j["family"] = "constant";
        j["value"] = jl.paramA();
        break;
    case JumpLaw::Family::Uniform:
        j["family"] = "uniform";
        j["lo"] = jl.paramA();
        j["hi"] = jl.paramB();
        break;
    case JumpLaw::Family::Exponential:
        j["family"] = "exponential";
        j["rate"] = jl.paramA();
        break;
    case JumpLaw::Family::Lattice: {
        j["family"] = "lattice";
        j["step"] = jl.step();
        json atoms = json::array();
        for (const auto& [v, p] : jl.atoms()) atoms.push_back({v, p});
        j["atoms"] = atoms;
        break;
    }
    }
    return j;
}

JumpLaw jumpFromJson(const json& j) {
    if (!j.is_object()) throw SchemaError("jump law must be a JSON object");
    const std::string family = requireString(j, "family");
    if (family == "constant") return JumpLaw::constant(requireNumber(j, "value"));
    if (family == "uniform") return JumpLaw::uniform(requireNumber(j, "lo"), requireNumber(j, "hi"));
    if (family == "exponential") return JumpLaw::exponential(requireNumber(j, "rate"));
    if (family == "lattice") {
        if (!j.contains("atoms") || !j["atoms"].is_array())
            throw SchemaError("lattice jump law needs an 'atoms' array");
        std::vector<std::pair<double, double>> atoms;
        for (const auto& a : j["atoms"]) {
            if (!a.is_array() || a.size() != 2) throw SchemaError("atoms must be [value, prob] pairs");
            atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
        }
        return JumpLaw::lattice(requireNumber(j, "step"), std::move(atoms));
    }
    throw SchemaError("unknown jump family '" + family + "'");
}

json lawToJson(const IncrementLaw& law) {
    json j;
    if (law.isLattice()) {
        j["mode"] = "lattice";
        j["step"] = law.step();
        json atoms = json::array();
        for (const auto& a : law.atoms())
            atoms.push_back({static_cast<double>(a.k) * law.step(), a.p});
        j["atoms"] = atoms;
        return j;
    }
    j["mode"] = "sampler";
    if (law.samplerRate() > 0.0 || law.samplerSigma() > 0.0) {
        if (law.samplerRate() == 0.0) {
            j["family"] = "gaussian";
            j["mean"] = law.samplerDrift();
            j["sigma"] = law.samplerSigma();
        } else {
            j["family"] = "jump_diffusion_step";
            j["drift"] = law.samplerDrift();
            j["sigma"] = law.samplerSigma();
            j["rate"] = law.samplerRate();
            j["jump"] = jumpToJson(*law.samplerJump());
        }
        return j;
    }
    throw Unsupported("cli", "ad hoc sampler laws do not serialize");
}

IncrementLaw lawFromJson(const json& j) {
    if (!j.is_object()) throw SchemaError("law must be a JSON object");
    const std::string mode = requireString(j, "mode");
    if (mode == "lattice") {
        if (!j.contains("atoms") || !j["atoms"].is_array())
            throw SchemaError("lattice law needs an 'atoms' array");
        std::vector<std::pair<double, double>> atoms;
        for (const auto& a : j["atoms"]) {
            if (!a.is_array() || a.size() != 2) throw SchemaError("atoms must be [value, prob] pairs");
            atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
        }
        return IncrementLaw::lattice(requireNumber(j, "step"), atoms);
    }
    if (mode == "sampler") {
        const std::string family = requireString(j, "family");
        if (family == "gaussian")
            return IncrementLaw::gaussian(requireNumber(j, "mean"), requireNumber(j, "sigma"));
        if (family == "jump_diffusion_step") {
            std::optional<JumpLaw> jump;
            double rate = 0.0;
            if (j.contains("rate")) rate = requireNumber(j, "rate");
            if (rate > 0.0) {
                if (!j.contains("jump")) throw SchemaError("positive rate needs a 'jump' object");
                jump = jumpFromJson(j["jump"]);
            }
            const double sigma = j.contains("sigma") ? requireNumber(j, "sigma") : 0.0;
            return IncrementLaw::jumpDiffusionStep(requireNumber(j, "drift"), sigma, rate, jump);
        }
        throw SchemaError("unknown sampler family '" + family + "'");
    }
    throw SchemaError("unknown law mode '" + mode + "'");
}

json modelToJson(const LevyModel& m) {
    json j;
    j["drift"] = m.drift();
    j["sigma"] = m.sigma();
    if (m.jumps()) {
        j["jumps"] = {{"rate", m.jumps()->rate}, {"law", jumpToJson(m.jumps()->law)}};
    }
    return j;
}

LevyModel modelFromJson(const json& j) {
    if (!j.is_object()) throw SchemaError("model must be a JSON object");
    std::optional<LevyJumps> jumps;
    if (j.contains("jumps") && !j["jumps"].is_null()) {
        const json& lj = j["jumps"];
        jumps = LevyJumps{requireNumber(lj, "rate"), jumpFromJson(lj.contains("law") ? lj["law"] : json())};
    }
    const double sigma = j.contains("sigma") ? requireNumber(j, "sigma") : 0.0;
    return LevyModel(requireNumber(j, "drift"), sigma, jumps);
}

const char* regimeName(Regime r) {
    switch (r) {
    case Regime::StopEverywhere: return "stop_everywhere";
    case Regime::Finite: return "finite";
    case Regime::NeverStop: return "never_stop";
    case Regime::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

const char* finitenessName(Finiteness f) {
    switch (f) {
    case Finiteness::Finite: return "finite";
    case Finiteness::Infinite: return "infinite";
    case Finiteness::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

json verdictToJson(const FinitenessVerdict& v) {
    json j;
    j["verdict"] = finitenessName(v.verdict);
    j["witness"] = v.witness;
    j["beta_used"] = v.betaUsed;
    if (v.thresholdUpperBound) j["threshold_upper_bound"] = *v.thresholdUpperBound;
    return j;
}

json solutionToJson(const ThresholdSolution& s) {
    json j;
    j["regime"] = regimeName(s.regime);
    j["u"] = encodeFinite(s.u);
    j["u_tolerance"] = s.uTolerance;
    j["w"] = encodeFinite(s.w);
    j["w_diverged"] = s.wDiverged;
    j["beta"] = s.beta;
    j["method"] = s.method == SolveMethod::ExactLattice ? "exact_lattice" : "monte_carlo";
    j["classification"] = verdictToJson(s.classification);
    if (!s.inconclusiveReason.empty()) j["inconclusive_reason"] = s.inconclusiveReason;
    if (!s.levelIterates.empty()) j["level_iterates"] = s.levelIterates;
    json trace = json::array();
    for (const auto& p : s.ratioTrace) trace.push_back({p.x, encodeFinite(p.rho), p.se});
    j["ratio_trace"] = trace;
    return j;
}

json crossValidationToJson(const CrossValidation& cv) {
    json j;
    j["pass"] = cv.pass;
    j["threshold_ok"] = cv.thresholdOk;
    j["values_ok"] = cv.valuesOk;
    j["threshold_gap"] = cv.thresholdGap;
    j["worst_value_gap"] = cv.worstValueGap;
    j["worst_x"] = cv.worstX;
    if (!cv.note.empty()) j["note"] = cv.note;
    return j;
}

json sequenceToJson(const ThresholdSequence& seq) {
    json j;
    json levels = json::array();
    for (const auto& l : seq.levels)
        levels.push_back({{"level", l.level},
                          {"regime", regimeName(l.regime)},
                          {"u", encodeFinite(l.u)},
                          {"tolerance", l.tolerance}});
    j["levels"] = levels;
    j["extrapolated"] = encodeFinite(seq.extrapolated);
    j["infinite"] = seq.infinite;
    return j;
}

json smoothFitToJson(const SmoothFitReport& rep) {
    json j;
    j["regularity"] = rep.regularity == Regularity::Regular ? "regular" : "irregular";
    j["u"] = rep.u;
    j["g_prime_left"] = encodeFinite(rep.gPrimeLeft);
    j["g_prime_right"] = encodeFinite(rep.gPrimeRight);
    j["v_prime_left"] = rep.vPrimeLeft;
    j["v_prime_left_error"] = rep.vPrimeLeftError;
    j["v_prime_right"] = encodeFinite(rep.vPrimeRight);
    if (rep.zeta) j["zeta"] = encodeFinite(*rep.zeta);
    if (rep.criterion) {
        const char* name = *rep.criterion == CriterionVerdict::Holds     ? "holds"
                           : *rep.criterion == CriterionVerdict::Fails   ? "fails"
                                                                         : "borderline";
        j["criterion_a1"] = name;
    }
    if (rep.overshootFormula) {
        j["overshoot_derivative"] = {{"value", rep.overshootFormula->value},
                                     {"error", rep.overshootFormula->error}};
    }
    j["verdict"] =
        rep.verdict == SmoothFitVerdict::SmoothFitHolds ? "smooth_fit_holds" : "smooth_fit_fails";
    return j;
}

} // namespace optstop::codec

namespace optstop {

using codec::json;

std::string toJsonText(const RewardFunction& f) { return codec::rewardToJson(f).dump(2); }
RewardFunction rewardFromJsonText(const std::string& text) {
    return codec::rewardFromJson(json::parse(text, nullptr, true, true));
}

std::string toJsonText(const IncrementLaw& law) { return codec::lawToJson(law).dump(2); }
IncrementLaw lawFromJsonText(const std::string& text) {
    return codec::lawFromJson(json::parse(text, nullptr, true, true));
}

std::string toJsonText(const LevyModel& model) { return codec::modelToJson(model).dump(2); }
LevyModel modelFromJsonText(const std::string& text) {
    return codec::modelFromJson(json::parse(text, nullptr, true, true));
}

std::string toJsonText(const ThresholdSolution& solution) {
    return codec::solutionToJson(solution).dump(2);
}
std::string toJsonText(const FinitenessVerdict& verdict) {
    return codec::verdictToJson(verdict).dump(2);
}
std::string toJsonText(const SmoothFitReport& report) {
    return codec::smoothFitToJson(report).dump(2);
}

void writeValueCsv(std::ostream& os, std::span<const double> xs, const RewardFunction& f,
                   std::span<const Estimate> values) {
    os << "x,g,V\n";
    os.precision(17);
    for (std::size_t i = 0; i < xs.size(); ++i)
        os << xs[i] << ',' << f.eval(xs[i]) << ',' << values[i].value << '\n';
}

void writeRatioCsv(std::ostream& os, const std::vector<RatioPoint>& trace) {
    os << "x,rho,se\n";
    os.precision(17);
    for (const auto& p : trace) os << p.x << ',' << p.rho << ',' << p.se << '\n';
}

void writeSequenceCsv(std::ostream& os, const ThresholdSequence& seq) {
    os << "level,u,tolerance\n";
    os.precision(17);
    for (const auto& l : seq.levels) os << l.level << ',' << l.u << ',' << l.tolerance << '\n';
}

void writeDpCsv(std::ostream& os, const DpResult& dp, const RewardFunction& f) {
    os << "x,g,V,in_stopping_set\n";
    os.precision(17);
    for (std::size_t i = 0; i < dp.grid.size(); ++i)
        os << dp.grid[i] << ',' << f.eval(dp.grid[i]) << ',' << dp.values[i] << ','
           << int(dp.stopping[i]) << '\n';
}

void writeDerivativeCsv(std::ostream& os, const DerivativeEstimate& d) {
    os << "eps,one_sided_difference,se\n";
    os.precision(17);
    for (const auto& row : d.table)
        os << row.eps << ',' << row.oneSidedDifference << ',' << row.se << '\n';
}

} // namespace optstop
