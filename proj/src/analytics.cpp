#include "polinfer/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "polinfer/errors.hpp"

namespace polinfer {

UtilitySpec UtilitySpec::equal_weights(std::vector<std::pair<std::string, std::string>> targets,
                                       double scale) {
    UtilitySpec spec;
    spec.scale = scale;
    const double w = targets.empty() ? 0.0 : 1.0 / static_cast<double>(targets.size());
    for (auto& [var, good] : targets) spec.targets.push_back({std::move(var), std::move(good), w});
    return spec;
}

void UtilitySpec::check() const {
    if (targets.empty()) throw DomainError("utility needs at least one target");
    double total = 0.0;
    for (const auto& t : targets) {
        if (!(t.weight >= 0.0)) throw DomainError("utility weights must be non-negative");
        total += t.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("utility weights must sum to 1");
    if (!(scale > 0.0)) throw DomainError("utility scale must be positive");
    if (kind == Kind::Exponential && !(risk > 0.0)) {
        throw DomainError("exponential utility needs a positive risk coefficient");
    }
}

namespace {

double good_probability(std::span<const Marginal> marginals, const UtilityTarget& t) {
    for (const auto& m : marginals) {
        if (m.variable == t.variable) return m.probability(t.good_state);
    }
    throw LookupError("no marginal supplied for utility target '" + t.variable + "'");
}

}  // namespace

double utility(std::span<const Marginal> marginals, const UtilitySpec& spec) {
    spec.check();
    double inner = 0.0;
    for (const auto& t : spec.targets) inner += t.weight * good_probability(marginals, t);
    if (spec.kind == UtilitySpec::Kind::Linear) return spec.scale * inner;
    return spec.scale * (1.0 - std::exp(-spec.risk * inner));
}

std::vector<double> utility_contributions(std::span<const Marginal> marginals, const UtilitySpec& spec) {
    spec.check();
    std::vector<double> out;
    for (const auto& t : spec.targets) {
        out.push_back(t.weight * good_probability(marginals, t) * spec.scale);
    }
    return out;
}

double entropy(std::span<const double> distribution) {
    double h = 0.0;
    for (double p : distribution) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

namespace {

struct Pairwise {
    std::size_t nx, ny;
    std::vector<double> pxy, px, py;
};

Pairwise split(const Factor& joint) {
    if (joint.scope().size() != 2) throw DomainError("pairwise statistic needs a two-variable joint");
    Pairwise p{joint.cardinalities()[0], joint.cardinalities()[1], joint.values(), {}, {}};
    p.px.assign(p.nx, 0.0);
    p.py.assign(p.ny, 0.0);
    for (std::size_t i = 0; i < p.nx; ++i) {
        for (std::size_t j = 0; j < p.ny; ++j) {
            p.px[i] += p.pxy[i * p.ny + j];
            p.py[j] += p.pxy[i * p.ny + j];
        }
    }
    return p;
}

}  // namespace

MutualInformation mutual_information(const Factor& joint_xy) {
    const auto p = split(joint_xy);
    MutualInformation out;
    for (std::size_t i = 0; i < p.nx; ++i) {
        for (std::size_t j = 0; j < p.ny; ++j) {
            const double pij = p.pxy[i * p.ny + j];
            if (pij > 0.0) out.bits += pij * std::log2(pij / (p.px[i] * p.py[j]));
        }
    }
    out.bits = std::max(out.bits, 0.0);
    const double hx = entropy(p.px);
    if (hx > 0.0) {
        out.percent_of_entropy = 100.0 * out.bits / hx;
    } else {
        out.degenerate = true;
    }
    return out;
}

double variance_of_belief(const Factor& joint_xy) {
    const auto p = split(joint_xy);
    double s2 = 0.0;
    for (std::size_t j = 0; j < p.ny; ++j) {
        if (p.py[j] <= 0.0) continue;
        for (std::size_t i = 0; i < p.nx; ++i) {
            const double pij = p.pxy[i * p.ny + j];
            const double shift = pij / p.py[j] - p.px[i];
            s2 += pij * shift * shift;
        }
    }
    return s2;
}

namespace {

Factor pair_joint(const DiscreteNetwork& net, std::string_view x, std::string_view y) {
    if (x == y) throw DomainError("pairwise statistic needs two distinct variables");
    const std::string targets[] = {std::string(x), std::string(y)};
    return joint_query(net, targets);
}

}  // namespace

MutualInformation mutual_information(const DiscreteNetwork& net, std::string_view x,
                                     std::string_view y) {
    return mutual_information(pair_joint(net, x, y));
}

double variance_of_belief(const DiscreteNetwork& net, std::string_view x, std::string_view y) {
    return variance_of_belief(pair_joint(net, x, y));
}

SensitivityReport sensitivity_ranking(const DiscreteNetwork& net, std::string_view target,
                                      std::span<const std::string> candidates, std::size_t top_k) {
    SensitivityReport report{std::string(target), {}};
    for (const auto& c : candidates) {
        if (c == target) throw DomainError("sensitivity target must not be among its candidates");
        const auto joint = pair_joint(net, target, c);
        const auto mi = mutual_information(joint);
        report.rows.push_back({c, mi.bits, mi.percent_of_entropy, variance_of_belief(joint)});
    }
    std::stable_sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
        if (a.mutual_information != b.mutual_information) return a.mutual_information > b.mutual_information;
        return a.source < b.source;
    });
    if (report.rows.size() > top_k) report.rows.resize(top_k);
    return report;
}

}  // namespace polinfer
