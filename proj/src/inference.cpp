#include "polinfer/inference.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "polinfer/errors.hpp"

namespace polinfer {

double Marginal::probability(std::string_view state) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] == state) return distribution[i];
    }
    throw LookupError("marginal of '" + variable + "' has no state '" + std::string(state) + "'");
}

Factor eliminate(std::vector<Factor> factors, std::span<const std::size_t> keep,
                 std::span<const std::string> names, TieBreak tie_break) {
    std::map<std::size_t, std::set<std::size_t>> adjacency;
    for (const auto& f : factors) {
        for (auto a : f.scope()) {
            auto& nb = adjacency[a];
            for (auto b : f.scope()) {
                if (a != b) nb.insert(b);
            }
        }
    }
    for (auto k : keep) {
        if (!adjacency.contains(k)) throw LookupError("kept variable does not occur in any factor");
    }

    std::set<std::size_t> pending;
    for (const auto& [v, nb] : adjacency) {
        if (std::find(keep.begin(), keep.end(), v) == keep.end()) pending.insert(v);
    }

    auto precedes = [&](std::size_t a, std::size_t b) {
        return tie_break == TieBreak::Lexicographic ? names[a] < names[b] : names[b] < names[a];
    };

    while (!pending.empty()) {
        std::size_t best = *pending.begin();
        std::size_t best_fill = static_cast<std::size_t>(-1);
        for (auto v : pending) {
            const auto& nb = adjacency[v];
            std::size_t fill = 0;
            for (auto i = nb.begin(); i != nb.end(); ++i) {
                const auto& ni = adjacency[*i];
                for (auto j = std::next(i); j != nb.end(); ++j) {
                    if (!ni.contains(*j)) ++fill;
                }
            }
            if (fill < best_fill || (fill == best_fill && precedes(v, best))) {
                best = v;
                best_fill = fill;
            }
        }

        Factor merged;
        std::vector<Factor> rest;
        rest.reserve(factors.size());
        for (auto& f : factors) {
            if (f.contains(best)) {
                merged = merged.product(f);
            } else {
                rest.push_back(std::move(f));
            }
        }
        rest.push_back(merged.sum_out(best));
        factors = std::move(rest);

        const auto nb = adjacency[best];
        for (auto a : nb) {
            auto& na = adjacency[a];
            na.erase(best);
            for (auto b : nb) {
                if (a != b) na.insert(b);
            }
        }
        adjacency.erase(best);
        pending.erase(best);
    }

    Factor result;
    for (const auto& f : factors) result = result.product(f);
    return result.permuted(keep);
}

namespace {

struct ResolvedEvidence {
    std::vector<std::pair<std::size_t, std::size_t>> items;  // (variable, state)
};

ResolvedEvidence resolve(const DiscreteNetwork& net, const Evidence& evidence) {
    ResolvedEvidence out;
    for (const auto& [name, label] : evidence) {
        out.items.emplace_back(net.index_of(name), net.state_of(name, label));
    }
    return out;
}

std::vector<std::string> all_names(const DiscreteNetwork& net) {
    std::vector<std::string> names;
    names.reserve(net.size());
    for (const auto& v : net.variables()) names.push_back(v.name);
    return names;
}

Factor ve_joint(const DiscreteNetwork& net, const std::vector<std::size_t>& targets,
                const Evidence& evidence, const QueryOptions& options) {
    const auto observed = resolve(net, evidence);
    std::set<std::size_t> distinct(targets.begin(), targets.end());
    if (distinct.size() != targets.size()) throw DomainError("query targets must be distinct");

    std::vector<std::size_t> roots(targets.begin(), targets.end());
    for (auto [v, s] : observed.items) roots.push_back(v);
    auto relevant = ancestors(net, roots);
    relevant.insert(roots.begin(), roots.end());

    std::vector<Factor> factors;
    factors.reserve(relevant.size() + observed.items.size());
    for (auto v : relevant) {
        Factor f = cpt_factor(net, v);
        bool reduced = false;
        for (auto [e, s] : observed.items) {
            if (distinct.contains(e) || !f.contains(e)) continue;
            f = f.reduce(e, s);
            reduced = true;
        }
        if (reduced && f.normalize() <= 0.0) {
            throw ImpossibleEvidence("evidence has zero probability");
        }
        factors.push_back(std::move(f));
    }
    for (auto [e, s] : observed.items) {
        if (!distinct.contains(e)) continue;
        std::vector<double> indicator(net.variable(e).cardinality(), 0.0);
        indicator[s] = 1.0;
        factors.emplace_back(std::vector<std::size_t>{e},
                             std::vector<std::size_t>{net.variable(e).cardinality()},
                             std::move(indicator));
    }

    const auto names = all_names(net);
    Factor joint = eliminate(std::move(factors), targets, names, options.tie_break);
    if (joint.normalize() <= 0.0) throw ImpossibleEvidence("evidence has zero probability");
    return joint;
}

std::vector<std::size_t> target_ids(const DiscreteNetwork& net, std::span<const std::string> targets) {
    if (targets.empty()) throw DomainError("at least one query target is required");
    std::vector<std::size_t> ids;
    for (const auto& t : targets) ids.push_back(net.index_of(t));
    return ids;
}

Marginal to_marginal(const DiscreteNetwork& net, std::size_t id, const Factor& f) {
    return Marginal{net.variable(id).name, net.variable(id).states, f.values()};
}

}  // namespace

Marginal posterior_marginal(const DiscreteNetwork& net, std::string_view target,
                            const Evidence& evidence, const QueryOptions& options) {
    const auto id = net.index_of(target);
    return to_marginal(net, id, ve_joint(net, {id}, evidence, options));
}

Factor joint_query(const DiscreteNetwork& net, std::span<const std::string> targets,
                   const Evidence& evidence, const QueryOptions& options) {
    return ve_joint(net, target_ids(net, targets), evidence, options);
}

Factor enumeration_joint(const DiscreteNetwork& net, std::span<const std::string> targets,
                         const Evidence& evidence, std::size_t cap) {
    const auto ids = target_ids(net, targets);
    const auto observed = resolve(net, evidence);
    const std::size_t n = net.size();

    std::size_t space = 1;
    for (const auto& v : net.variables()) {
        if (space > cap / v.cardinality()) {
            throw StateSpaceTooLarge("joint state space exceeds enumeration cap");
        }
        space *= v.cardinality();
    }

    struct Local {
        const Cpt* cpt;
        std::vector<std::size_t> parents;
        std::vector<std::size_t> parent_cards;
    };
    std::vector<Local> locals(n);
    for (std::size_t i = 0; i < n; ++i) {
        locals[i].cpt = net.cpt(i);
        if (!locals[i].cpt) throw StructuralError("variable '" + net.variable(i).name + "' has no CPT");
        for (const auto& p : locals[i].cpt->parents) {
            const auto pid = net.index_of(p);
            locals[i].parents.push_back(pid);
            locals[i].parent_cards.push_back(net.variable(pid).cardinality());
        }
    }

    std::vector<std::size_t> cards;
    for (auto id : ids) cards.push_back(net.variable(id).cardinality());
    std::size_t cells = 1;
    for (auto c : cards) cells *= c;
    std::vector<double> joint(cells, 0.0);

    std::vector<std::size_t> assignment(n, 0);
    for (std::size_t k = 0; k < space; ++k) {
        bool consistent = true;
        for (auto [v, s] : observed.items) {
            if (assignment[v] != s) {
                consistent = false;
                break;
            }
        }
        if (consistent) {
            double p = 1.0;
            for (std::size_t i = 0; i < n && p > 0.0; ++i) {
                const auto& local = locals[i];
                std::size_t row = 0;
                for (std::size_t j = 0; j < local.parents.size(); ++j) {
                    row = row * local.parent_cards[j] + assignment[local.parents[j]];
                }
                p *= local.cpt->rows[row][assignment[i]];
            }
            std::size_t cell = 0;
            for (std::size_t j = 0; j < ids.size(); ++j) cell = cell * cards[j] + assignment[ids[j]];
            joint[cell] += p;
        }
        for (std::size_t i = n; i-- > 0;) {
            if (++assignment[i] < net.variable(i).cardinality()) break;
            assignment[i] = 0;
        }
    }

    Factor out(ids, cards, std::move(joint));
    if (out.normalize() <= 0.0) throw ImpossibleEvidence("evidence has zero probability");
    return out;
}

Marginal enumeration_oracle(const DiscreteNetwork& net, std::string_view target,
                            const Evidence& evidence, std::size_t cap) {
    const std::string name(target);
    const auto id = net.index_of(name);
    return to_marginal(net, id, enumeration_joint(net, std::span(&name, 1), evidence, cap));
}

}  // namespace polinfer
