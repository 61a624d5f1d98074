#include "polinfer/factor.hpp"

#include <algorithm>
#include <numeric>

#include "polinfer/errors.hpp"

namespace polinfer {

namespace {

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& cards) {
    std::vector<std::size_t> strides(cards.size());
    std::size_t s = 1;
    for (std::size_t i = cards.size(); i-- > 0;) {
        strides[i] = s;
        s *= cards[i];
    }
    return strides;
}

std::size_t position_of(const std::vector<std::size_t>& scope, std::size_t var) {
    auto it = std::find(scope.begin(), scope.end(), var);
    if (it == scope.end()) throw LookupError("variable not in factor scope");
    return static_cast<std::size_t>(it - scope.begin());
}

}  // namespace

Factor::Factor(std::vector<std::size_t> scope, std::vector<std::size_t> cardinalities,
               std::vector<double> values)
    : scope_(std::move(scope)), cards_(std::move(cardinalities)), values_(std::move(values)) {
    if (scope_.size() != cards_.size()) throw DomainError("factor scope/cardinality size mismatch");
    const std::size_t expected =
        std::accumulate(cards_.begin(), cards_.end(), std::size_t{1}, std::multiplies<>());
    if (values_.size() != expected) throw DomainError("factor value count does not match scope");
    for (double v : values_) {
        if (!(v >= 0.0)) throw DomainError("factor values must be non-negative");
    }
}

bool Factor::contains(std::size_t var) const {
    return std::find(scope_.begin(), scope_.end(), var) != scope_.end();
}

std::size_t Factor::cardinality_of(std::size_t var) const { return cards_[position_of(scope_, var)]; }

double Factor::at(std::span<const std::size_t> assignment) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < scope_.size(); ++i) idx = idx * cards_[i] + assignment[i];
    return values_[idx];
}

Factor Factor::product(const Factor& other) const {
    std::vector<std::size_t> scope = scope_;
    std::vector<std::size_t> cards = cards_;
    for (std::size_t i = 0; i < other.scope_.size(); ++i) {
        if (!contains(other.scope_[i])) {
            scope.push_back(other.scope_[i]);
            cards.push_back(other.cards_[i]);
        }
    }
    const std::size_t n = scope.size();

    // Stride of each union variable inside each operand (0 when absent).
    const auto sa = strides_of(cards_);
    const auto sb = strides_of(other.cards_);
    std::vector<std::size_t> stride_a(n, 0), stride_b(n, 0);
    for (std::size_t i = 0; i < scope_.size(); ++i) stride_a[i] = sa[i];
    for (std::size_t i = 0; i < other.scope_.size(); ++i) {
        stride_b[position_of(scope, other.scope_[i])] = sb[i];
    }

    std::size_t total = 1;
    for (auto c : cards) total *= c;
    std::vector<double> out(total);
    std::vector<std::size_t> counter(n, 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t k = 0; k < total; ++k) {
        out[k] = values_[ia] * other.values_[ib];
        for (std::size_t l = n; l-- > 0;) {
            if (++counter[l] < cards[l]) {
                ia += stride_a[l];
                ib += stride_b[l];
                break;
            }
            counter[l] = 0;
            ia -= (cards[l] - 1) * stride_a[l];
            ib -= (cards[l] - 1) * stride_b[l];
        }
    }
    return Factor(std::move(scope), std::move(cards), std::move(out));
}

Factor Factor::sum_out(std::size_t var) const {
    const std::size_t p = position_of(scope_, var);
    const auto strides = strides_of(cards_);
    const std::size_t inner = strides[p];
    const std::size_t card = cards_[p];
    const std::size_t outer = values_.size() / (inner * card);

    std::vector<double> out(outer * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t x = 0; x < card; ++x) {
            const double* src = &values_[(o * card + x) * inner];
            double* dst = &out[o * inner];
            for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
        }
    }
    auto scope = scope_;
    auto cards = cards_;
    scope.erase(scope.begin() + static_cast<std::ptrdiff_t>(p));
    cards.erase(cards.begin() + static_cast<std::ptrdiff_t>(p));
    return Factor(std::move(scope), std::move(cards), std::move(out));
}

Factor Factor::reduce(std::size_t var, std::size_t state) const {
    const std::size_t p = position_of(scope_, var);
    if (state >= cards_[p]) throw LookupError("state index out of range");
    const auto strides = strides_of(cards_);
    const std::size_t inner = strides[p];
    const std::size_t card = cards_[p];
    const std::size_t outer = values_.size() / (inner * card);

    std::vector<double> out(outer * inner);
    for (std::size_t o = 0; o < outer; ++o) {
        std::copy_n(&values_[(o * card + state) * inner], inner, &out[o * inner]);
    }
    auto scope = scope_;
    auto cards = cards_;
    scope.erase(scope.begin() + static_cast<std::ptrdiff_t>(p));
    cards.erase(cards.begin() + static_cast<std::ptrdiff_t>(p));
    return Factor(std::move(scope), std::move(cards), std::move(out));
}

Factor Factor::permuted(std::span<const std::size_t> order) const {
    if (order.size() != scope_.size()) throw DomainError("permutation must cover the whole scope");
    const auto strides = strides_of(cards_);
    std::vector<std::size_t> cards(order.size()), src_stride(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto p = position_of(scope_, order[i]);
        cards[i] = cards_[p];
        src_stride[i] = strides[p];
    }
    std::vector<double> out(values_.size());
    std::vector<std::size_t> counter(order.size(), 0);
    std::size_t src = 0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = values_[src];
        for (std::size_t l = order.size(); l-- > 0;) {
            if (++counter[l] < cards[l]) {
                src += src_stride[l];
                break;
            }
            counter[l] = 0;
            src -= (cards[l] - 1) * src_stride[l];
        }
    }
    return Factor(std::vector<std::size_t>(order.begin(), order.end()), std::move(cards), std::move(out));
}

Factor Factor::marginal(std::span<const std::size_t> keep) const {
    Factor f = *this;
    for (auto v : scope_) {
        if (std::find(keep.begin(), keep.end(), v) == keep.end()) f = f.sum_out(v);
    }
    return f.permuted(keep);
}

double Factor::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double Factor::normalize() {
    const double total = sum();
    if (total > 0.0) {
        for (auto& v : values_) v /= total;
    }
    return total;
}

Factor cpt_factor(const DiscreteNetwork& net, std::size_t index) {
    const Cpt* cpt = net.cpt(index);
    if (!cpt) throw StructuralError("variable '" + net.variable(index).name + "' has no CPT");
    std::vector<std::size_t> scope, cards;
    for (const auto& p : cpt->parents) {
        const auto id = net.index_of(p);
        scope.push_back(id);
        cards.push_back(net.variable(id).cardinality());
    }
    scope.push_back(index);
    cards.push_back(net.variable(index).cardinality());
    std::vector<double> values;
    values.reserve(cpt->rows.size() * cards.back());
    for (const auto& row : cpt->rows) values.insert(values.end(), row.begin(), row.end());
    return Factor(std::move(scope), std::move(cards), std::move(values));
}

}  // namespace polinfer
