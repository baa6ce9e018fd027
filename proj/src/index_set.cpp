#include "smm/index_set.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace smm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate_weights(std::uint32_t dims, double degree, const std::vector<double>& g, const char* name) {
    if (dims == 0) throw ConfigError(std::string(name) + ": dimension must be positive");
    if (!(degree >= 0.0) || !std::isfinite(degree)) throw ConfigError(std::string(name) + ": degree must be >= 0");
    if (g.size() != dims)
        throw ConfigError(std::string(name) + ": weight vector length must equal the dimension");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0.0) || !std::isfinite(g[i])) throw ConfigError(std::string(name) + ": weights must be positive");
        if (i > 0 && g[i] < g[i - 1])
            throw ConfigError(std::string(name) + ": weights must be non-decreasing (permute dimensions first)");
    }
}

}  // namespace

std::string family_name(SetFamily family) {
    switch (family) {
        case SetFamily::TS: return "TS";
        case SetFamily::IsoTD: return "isoTD";
        case SetFamily::ATD: return "aTD";
        case SetFamily::IsoTP: return "isoTP";
        case SetFamily::ATP: return "aTP";
        case SetFamily::Loaded: return "loaded";
    }
    return "unknown";
}

SetFamily family_of(const IndexSetSpec& spec) {
    return std::visit(Overloaded{[](const TsSpec&) { return SetFamily::TS; },
                                 [](const IsoTdSpec&) { return SetFamily::IsoTD; },
                                 [](const AtdSpec&) { return SetFamily::ATD; },
                                 [](const IsoTpSpec&) { return SetFamily::IsoTP; },
                                 [](const AtpSpec&) { return SetFamily::ATP; }},
                      spec);
}

void validate(const IndexSetSpec& spec) {
    std::visit(Overloaded{
                   [](const TsSpec& s) {
                       if (!(s.eps > 0.0 && s.eps < 1.0)) throw ConfigError("TS: eps must lie in (0,1)");
                       for (std::size_t i = 0; i < s.mu.size(); ++i) {
                           if (!(s.mu[i] >= 0.0 && s.mu[i] < 1.0))
                               throw ConfigError("TS: mu entries must lie in [0,1)");
                           if (i > 0 && s.mu[i] > s.mu[i - 1]) throw ConfigError("TS: mu must be non-increasing");
                       }
                   },
                   [](const IsoTdSpec& s) {
                       if (s.dims == 0) throw ConfigError("isoTD: dimension must be positive");
                   },
                   [](const IsoTpSpec& s) {
                       if (s.dims == 0) throw ConfigError("isoTP: dimension must be positive");
                   },
                   [](const AtdSpec& s) { validate_weights(s.dims, s.degree, s.weights, "aTD"); },
                   [](const AtpSpec& s) { validate_weights(s.dims, s.degree, s.weights, "aTP"); }},
               spec);
}

void IndexSet::add_root(double weight) {
    indices_.emplace_back();
    weights_.push_back(weight);
    parents_.push_back(kNoParent);
    children_.emplace_back();
    lengths_.push_back(0);
}

IndexSet::Ordinal IndexSet::add_child(Ordinal parent, Position position, double weight) {
    const auto c = static_cast<Ordinal>(indices_.size());
    MultiIndex alpha = indices_[parent];
    alpha.increment_tail(position);
    indices_.push_back(std::move(alpha));
    weights_.push_back(weight);
    parents_.push_back(parent);
    children_.emplace_back();
    lengths_.push_back(position);
    auto& siblings = children_[parent];
    siblings.insert(siblings.begin(), c);
    return c;
}

void IndexSet::finalize_statistics() {
    max_order_ = 0;
    max_exponent_ = 0;
    max_length_ = 0;
    for (const MultiIndex& a : indices_) {
        max_order_ = std::max(max_order_, static_cast<std::uint32_t>(a.order()));
        max_exponent_ = std::max(max_exponent_, a.max_exponent());
        max_length_ = std::max(max_length_, a.length());
    }
}

IndexSet IndexSet::build(const IndexSetSpec& spec, const BuildOptions& options) {
    validate(spec);
    IndexSet set;
    set.spec_ = spec;
    set.family_ = family_of(spec);

    double root_weight = 0.0;
    std::visit(Overloaded{[&](const TsSpec& s) {
                              set.engine_ = Engine::Threshold;
                              set.mu_ = s.mu;
                              set.threshold_ = s.eps;
                              root_weight = 1.0;
                          },
                          [&](const AtdSpec& s) {
                              // sum g_n a_n <= g_min K  <=>  prod exp(-g_n/g_min)^a_n >= exp(-K)
                              set.engine_ = Engine::Threshold;
                              const double gmin = s.weights.front();
                              set.mu_.reserve(s.dims);
                              for (double g : s.weights) set.mu_.push_back(std::exp(-g / gmin));
                              set.threshold_ = std::exp(-s.degree) * (1.0 - kAnisotropicSlack);
                              root_weight = 1.0;
                          },
                          [&](const IsoTdSpec& s) {
                              set.engine_ = Engine::TotalDegree;
                              set.dims_ = s.dims;
                              set.degree_ = s.degree;
                          },
                          [&](const IsoTpSpec& s) {
                              set.engine_ = Engine::TensorProduct;
                              set.dims_ = s.dims;
                              set.scaled_.assign(s.dims, 1.0);
                              set.level_ = static_cast<double>(s.degree);
                          },
                          [&](const AtpSpec& s) {
                              set.engine_ = Engine::TensorProduct;
                              set.dims_ = s.dims;
                              const double gmin = s.weights.front();
                              for (double g : s.weights) set.scaled_.push_back(g / gmin);
                              set.level_ = s.degree * (1.0 + kAnisotropicSlack);
                          }},
               spec);

    struct Pending {
        Ordinal parent;
        Position position;
        double weight;
    };
    std::vector<Pending> stack;

    auto push_children = [&](Ordinal c) {
        const Position start = std::max<Position>(set.lengths_[c], 1);
        const double w = set.weights_[c];
        switch (set.engine_) {
            case Engine::Threshold:
                for (Position m = start; m <= set.mu_.size(); ++m) {
                    const double child = w * set.mu_[m - 1];
                    if (!(child >= set.threshold_)) break;
                    stack.push_back({c, m, child});
                }
                break;
            case Engine::TotalDegree:
                if (set.indices_[c].order() + 1 <= static_cast<std::int64_t>(set.degree_))
                    for (Position m = start; m <= set.dims_; ++m) stack.push_back({c, m, w + 1.0});
                break;
            case Engine::TensorProduct:
                for (Position m = start; m <= set.dims_; ++m) {
                    const double next = (set.indices_[c][m] + 1.0) * set.scaled_[m - 1];
                    if (next <= set.level_) stack.push_back({c, m, std::max(w, next)});
                }
                break;
            case Engine::Loaded: break;
        }
    };

    set.add_root(root_weight);
    push_children(0);
    while (!stack.empty()) {
        const Pending top = stack.back();
        stack.pop_back();
        if (set.indices_.size() >= options.max_size)
            throw SizeError("index set exceeds the configured maximum size of " + std::to_string(options.max_size));
        const Ordinal c = set.add_child(top.parent, top.position, top.weight);
        push_children(c);
    }
    set.finalize_statistics();
    return set;
}

IndexSet IndexSet::from_records(std::vector<MultiIndex> indices, std::vector<std::int64_t> parents,
                                std::vector<double> weights) {
    if (indices.empty() || !indices.front().is_zero() || parents.front() != kNoParent)
        throw ConfigError("index set records must start with the zero multi-index as root");
    if (parents.size() != indices.size() || weights.size() != indices.size())
        throw ConfigError("index set records have inconsistent lengths");
    IndexSet set;
    set.engine_ = Engine::Loaded;
    set.family_ = SetFamily::Loaded;
    set.add_root(weights.front());
    for (std::size_t c = 1; c < indices.size(); ++c) {
        const std::int64_t p = parents[c];
        if (p < 0 || static_cast<std::size_t>(p) >= c)
            throw ConfigError("record " + std::to_string(c) + ": parent ordinal must precede the child");
        const MultiIndex& parent = set.indices_[static_cast<std::size_t>(p)];
        const MultiIndex& child = indices[c];
        const Position pos = child.length();
        if (pos == 0 || pos < parent.length())
            throw ConfigError("record " + std::to_string(c) + ": not a child of its parent");
        MultiIndex expected = parent;
        expected.increment_tail(pos);
        if (!(expected == child))
            throw ConfigError("record " + std::to_string(c) + ": not a child of its parent");
        set.add_child(static_cast<Ordinal>(p), pos, weights[c]);
    }
    set.finalize_statistics();
    return set;
}

std::optional<IndexSet::Ordinal> IndexSet::child_at(Ordinal node, Position position) const {
    const auto& ch = children_[node];
    if (ch.empty()) return std::nullopt;
    std::size_t idx = 0;
    switch (engine_) {
        case Engine::Threshold:
        case Engine::TotalDegree: {
            // Children occupy consecutive positions starting at max(length, 1).
            const Position first = std::max<Position>(lengths_[node], 1);
            if (position < first) return std::nullopt;
            idx = position - first;
            break;
        }
        case Engine::TensorProduct: {
            // The child at the node's own length may be missing; count from the end.
            const Position last = lengths_[ch.back()];
            if (position > last || last - position >= ch.size()) return std::nullopt;
            idx = ch.size() - 1 - (last - position);
            break;
        }
        case Engine::Loaded: {
            const auto it = std::find_if(ch.begin(), ch.end(), [&](Ordinal c) { return lengths_[c] == position; });
            if (it == ch.end()) return std::nullopt;
            return *it;
        }
    }
    if (idx >= ch.size() || lengths_[ch[idx]] != position) return std::nullopt;
    return ch[idx];
}

std::optional<std::size_t> IndexSet::try_locate(std::span<const MultiIndex::Entry> pairs,
                                                std::size_t* steps) const {
    Ordinal k = 0;
    Position u = 1;
    std::size_t walked = 0;
    for (const auto& p : pairs) {
        if (p.value == 0) continue;
        std::uint32_t j = p.value;
        if (p.position > u) {
            const auto c = child_at(k, p.position);
            if (!c) return std::nullopt;
            k = *c;
            u = p.position;
            --j;
            ++walked;
        }
        for (; j > 0; --j) {
            const auto& ch = children_[k];
            if (ch.empty() || lengths_[ch.front()] != u) return std::nullopt;
            k = ch.front();
            ++walked;
        }
    }
    if (steps) *steps += walked;
    return k;
}

std::size_t IndexSet::locate(const MultiIndex& target, std::size_t* steps) const {
    const auto found = try_locate(target, steps);
    if (!found) throw NotFoundError("multi-index " + to_tuple_string(target) + " is not in the index set");
    return *found;
}

double IndexSet::offset_weight(const SignedMultiIndex& w) const {
    switch (engine_) {
        case Engine::Threshold: {
            double value = 1.0;
            for (const auto& e : w.pairs()) {
                const double mu = e.position <= mu_.size() ? mu_[e.position - 1] : 0.0;
                value *= std::pow(mu, static_cast<double>(e.value));
            }
            return value;
        }
        case Engine::TotalDegree: return static_cast<double>(w.order());
        case Engine::TensorProduct:
        case Engine::Loaded: return 0.0;
    }
    return 0.0;
}

double IndexSet::candidate_weight(double eta_weight, double w_offset_weight) const {
    switch (engine_) {
        case Engine::Threshold: return eta_weight / w_offset_weight;
        case Engine::TotalDegree: return eta_weight - w_offset_weight;
        case Engine::TensorProduct:
        case Engine::Loaded: return 0.0;
    }
    return 0.0;
}

bool IndexSet::admits(std::span<const MultiIndex::Entry> candidate, double weight_hint) const {
    switch (engine_) {
        case Engine::Threshold:
            if (!candidate.empty() && candidate.back().position > mu_.size()) return false;
            return !(weight_hint < threshold_ * (1.0 - 1e-9));
        case Engine::TotalDegree:
            if (!candidate.empty() && candidate.back().position > dims_) return false;
            return weight_hint <= static_cast<double>(degree_) + 0.5;
        case Engine::TensorProduct:
            for (const auto& e : candidate)
                if (e.position > dims_ || e.value * scaled_[e.position - 1] > level_) return false;
            return true;
        case Engine::Loaded: return true;
    }
    return true;
}

bool IndexSet::contains(const SignedMultiIndex& candidate, double weight_hint) const {
    std::vector<MultiIndex::Entry> pairs;
    pairs.reserve(candidate.support_size());
    for (const auto& e : candidate.pairs()) {
        if (e.value < 0) return false;
        pairs.push_back({e.position, static_cast<std::uint32_t>(e.value)});
    }
    if (!admits(pairs, weight_hint)) return false;
    return try_locate(pairs).has_value();
}

bool IndexSet::contains(const SignedMultiIndex& candidate) const {
    for (const auto& e : candidate.pairs())
        if (e.value < 0) return false;
    return contains(candidate, offset_weight(candidate));
}

void write_text(std::ostream& os, const IndexSet& set) {
    std::ostringstream line;
    line << std::setprecision(17);
    for (std::size_t c = 0; c < set.size(); ++c) {
        line.str("");
        line << c << '\t' << set.parent(c) << '\t' << to_pair_string(set.index(c)) << '\t' << set.weight(c) << '\n';
        os << line.str();
    }
}

IndexSet read_text(std::istream& is) {
    std::vector<MultiIndex> indices;
    std::vector<std::int64_t> parents;
    std::vector<double> weights;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 4) throw ConfigError("line " + std::to_string(lineno) + ": expected 4 tab-separated fields");
        try {
            if (std::stoull(fields[0]) != indices.size())
                throw ConfigError("line " + std::to_string(lineno) + ": ordinals must be consecutive from 0");
            parents.push_back(std::stoll(fields[1]));
            weights.push_back(std::stod(fields[3]));
        } catch (const std::logic_error&) {
            throw ConfigError("line " + std::to_string(lineno) + ": malformed number");
        }
        indices.push_back(parse_multi_index(fields[2]));
    }
    return IndexSet::from_records(std::move(indices), std::move(parents), std::move(weights));
}

}  // namespace smm
