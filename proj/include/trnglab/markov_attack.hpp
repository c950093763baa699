#pragma once

// Attacker model for the triggered TRNG.
//
// Once the entropy source is gone the collapse counter advances by a noisy,
// roughly constant increment per master clock. Its 7 low bits form a Markov
// chain on 128 states whose transition matrix is circulant. The attacker only
// observes COUNT[6:4], i.e. which 16-state block the chain is in, so the
// probability of an output sequence is obtained by restricting each step to
// the block-to-block submatrix selected by consecutive symbols.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "increment_pmf.hpp"

namespace trnglab {

inline constexpr int kMarkovStates = 128;
inline constexpr int kSymbolCount = 8;
inline constexpr int kBlockSize = kMarkovStates / kSymbolCount;   // states per symbol

using Matrix = Eigen::MatrixXd;
using StateVector = Eigen::RowVectorXd;
using SymbolSequence = std::vector<std::uint8_t>;

/// Top three bits of a 7-bit state.
[[nodiscard]] constexpr int state_symbol(int state) noexcept { return state / kBlockSize; }

struct TransitionMatrix {
    Matrix entries = Matrix::Zero(kMarkovStates, kMarkovStates);

    [[nodiscard]] double operator()(int i, int j) const { return entries(i, j); }
};

[[nodiscard]] inline TransitionMatrix build_transition_matrix(const IncrementPmf& pmf) {
    TransitionMatrix P;
    for (int i = 0; i < kMarkovStates; ++i)
        for (std::size_t idx = 0; idx < pmf.probs.size(); ++idx) {
            const std::int64_t k = pmf.min_increment + static_cast<std::int64_t>(idx);
            const auto j = static_cast<int>(((i + k) % kMarkovStates + kMarkovStates) % kMarkovStates);
            P.entries(i, j) += pmf.probs[idx];
        }
    return P;
}

[[nodiscard]] inline TransitionMatrix build_transition_matrix(double mu_lsb, double sigma_lsb) {
    return build_transition_matrix(build_increment_pmf(mu_lsb, sigma_lsb));
}

/// P^n by repeated squaring; P^0 is the identity.
[[nodiscard]] inline Matrix matrix_power(const Matrix& p, std::uint64_t n) {
    if (p.rows() != p.cols()) throw std::invalid_argument("matrix_power: matrix must be square");
    Matrix result = Matrix::Identity(p.rows(), p.cols());
    Matrix base = p;
    while (n) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n) base = base * base;
    }
    return result;
}

[[nodiscard]] inline TransitionMatrix matrix_power(const TransitionMatrix& p, std::uint64_t n) {
    return TransitionMatrix{matrix_power(p.entries, n)};
}

inline void check_symbol(int s) {
    if (s < 0 || s >= kSymbolCount) throw std::out_of_range("symbol must be in [0, 7]");
}

/// P with every transition zeroed except those from a state whose symbol is
/// `from_symbol` to a state whose symbol is `to_symbol`.
[[nodiscard]] inline Matrix mask_for_symbols(const TransitionMatrix& p, int from_symbol,
                                             int to_symbol) {
    check_symbol(from_symbol);
    check_symbol(to_symbol);
    Matrix masked = Matrix::Zero(kMarkovStates, kMarkovStates);
    masked.block(from_symbol * kBlockSize, to_symbol * kBlockSize, kBlockSize, kBlockSize) =
        p.entries.block(from_symbol * kBlockSize, to_symbol * kBlockSize, kBlockSize, kBlockSize);
    return masked;
}

/// Uniform start over all 128 states.
[[nodiscard]] inline StateVector initial_state_vector() {
    return StateVector::Constant(kMarkovStates, 1.0 / kMarkovStates);
}

[[nodiscard]] inline double sequence_probability(const TransitionMatrix& p,
                                                 std::span<const std::uint8_t> symbols) {
    if (symbols.empty()) throw std::invalid_argument("sequence_probability: empty query");
    for (auto s : symbols) check_symbol(s);
    // The masked vector is supported on one 16-state block at a time, so each
    // masked step is a 16x16 block product.
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Constant(kBlockSize, 1.0 / kMarkovStates);
    for (std::size_t t = 1; t < symbols.size(); ++t)
        v = v * p.entries.block(symbols[t - 1] * kBlockSize, symbols[t] * kBlockSize, kBlockSize,
                                kBlockSize);
    return v.sum();
}

struct RankedSequence {
    SymbolSequence symbols;
    double probability = 0.0;
};

/// Number of length-L sequences, saturating at the largest uint64.
[[nodiscard]] inline std::uint64_t sequence_space_size(std::size_t length) noexcept {
    if (length >= 21) return std::numeric_limits<std::uint64_t>::max();
    return std::uint64_t{1} << (3 * length);
}

/// Best-first enumeration of length-L symbol sequences in nonincreasing
/// probability. A prefix is scored by the mass of its masked state vector,
/// which bounds the probability of every completion because no masked step
/// can increase mass. Exact ties go to the lexicographically smaller sequence.
class BestFirstEnumerator {
public:
    struct Emitted {
        double probability;
        std::uint32_t parent;
        std::uint8_t symbol;
    };

    BestFirstEnumerator(const BestFirstEnumerator&) = delete;
    BestFirstEnumerator& operator=(const BestFirstEnumerator&) = delete;

    BestFirstEnumerator(const TransitionMatrix& p, std::size_t length)
        : length_(length), queue_(Compare{this}) {
        if (length == 0) throw std::invalid_argument("sequence length must be >= 1");
        if (length > std::numeric_limits<std::uint16_t>::max())
            throw std::invalid_argument("sequence length too large");
        for (int a = 0; a < kSymbolCount; ++a)
            for (int b = 0; b < kSymbolCount; ++b) {
                blocks_[idx(a, b)] =
                    p.entries.block(a * kBlockSize, b * kBlockSize, kBlockSize, kBlockSize);
                row_sums_[idx(a, b)] = blocks_[idx(a, b)].rowwise().sum();
            }
        for (int a = 0; a < kSymbolCount; ++a)
            queue_.push(Frontier{static_cast<double>(kBlockSize) / kMarkovStates, kRoot,
                                 static_cast<std::uint8_t>(a), 1});
    }

    /// Next most likely complete sequence, or false when the space is exhausted.
    bool next(Emitted& out) {
        while (!queue_.empty()) {
            const Frontier f = queue_.top();
            queue_.pop();
            if (f.depth == length_) {
                out = Emitted{f.mass, f.parent, f.symbol};
                return true;
            }
            expand(f);
        }
        return false;
    }

    [[nodiscard]] SymbolSequence symbols(const Emitted& e) const {
        SymbolSequence seq(length_);
        seq[length_ - 1] = e.symbol;
        std::size_t pos = length_ - 1;
        for (std::uint32_t n = e.parent; n != kRoot; n = nodes_[n].parent) seq[--pos] = nodes_[n].symbol;
        return seq;
    }

    [[nodiscard]] std::size_t expanded_nodes() const noexcept { return nodes_.size(); }

private:
    static constexpr std::uint32_t kRoot = std::numeric_limits<std::uint32_t>::max();
    using Block = Eigen::Matrix<double, kBlockSize, kBlockSize>;
    using BlockVec = Eigen::Matrix<double, 1, kBlockSize>;
    using ColVec = Eigen::Matrix<double, kBlockSize, 1>;

    struct Node {
        BlockVec v;
        std::uint32_t parent;
        std::uint8_t symbol;
    };
    struct Frontier {
        double mass;
        std::uint32_t parent;   // expanded node this extends, kRoot for first symbol
        std::uint8_t symbol;
        std::uint16_t depth;
    };
    struct Compare {
        const BestFirstEnumerator* self;
        // priority_queue is a max-heap: "less" means lower priority.
        bool operator()(const Frontier& a, const Frontier& b) const {
            if (a.mass != b.mass) return a.mass < b.mass;
            return self->lex_greater(a, b);
        }
    };

    static constexpr std::size_t idx(int a, int b) noexcept {
        return static_cast<std::size_t>(a * kSymbolCount + b);
    }

    void expand(const Frontier& f) {
        Node node;
        node.parent = f.parent;
        node.symbol = f.symbol;
        if (f.parent == kRoot)
            node.v = BlockVec::Constant(1.0 / kMarkovStates);
        else
            node.v = nodes_[f.parent].v * blocks_[idx(nodes_[f.parent].symbol, f.symbol)];
        if (nodes_.size() >= kRoot) throw std::length_error("best-first enumeration too large");
        const auto id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(node);
        for (int b = 0; b < kSymbolCount; ++b) {
            const double mass = node.v.dot(row_sums_[idx(f.symbol, b)].transpose());
            queue_.push(Frontier{mass, id, static_cast<std::uint8_t>(b),
                                 static_cast<std::uint16_t>(f.depth + 1)});
        }
    }

    void prefix(const Frontier& f, SymbolSequence& out) const {
        out.assign(f.depth, 0);
        out[f.depth - 1] = f.symbol;
        std::size_t pos = f.depth - 1;
        for (std::uint32_t n = f.parent; n != kRoot; n = nodes_[n].parent) out[--pos] = nodes_[n].symbol;
    }

    bool lex_greater(const Frontier& a, const Frontier& b) const {
        prefix(a, scratch_a_);
        prefix(b, scratch_b_);
        return scratch_b_ < scratch_a_;
    }

    std::size_t length_;
    std::array<Block, kSymbolCount * kSymbolCount> blocks_{};
    std::array<ColVec, kSymbolCount * kSymbolCount> row_sums_{};
    std::vector<Node> nodes_;
    std::priority_queue<Frontier, std::vector<Frontier>, Compare> queue_;
    mutable SymbolSequence scratch_a_, scratch_b_;
};

[[nodiscard]] inline std::vector<RankedSequence> top_k_sequences(const TransitionMatrix& p,
                                                                 std::size_t length,
                                                                 std::uint64_t k) {
    if (k == 0) throw std::invalid_argument("top_k_sequences: k must be >= 1");
    k = std::min(k, sequence_space_size(length));
    BestFirstEnumerator search(p, length);
    std::vector<RankedSequence> out;
    BestFirstEnumerator::Emitted e{};
    while (out.size() < k && search.next(e)) out.push_back(RankedSequence{search.symbols(e), e.probability});
    return out;
}

struct AttackPoint {
    std::uint64_t guess_budget = 0;
    double success_probability = 0.0;
};

struct AttackCurve {
    int key_bits = 0;
    std::size_t sequence_length = 0;
    std::vector<AttackPoint> points;
};

[[nodiscard]] constexpr std::size_t outputs_for_key(int key_bits) noexcept {
    return static_cast<std::size_t>((key_bits + 2) / 3);
}

/// Success probability of trying the `budget` most likely output sequences of a
/// key of `key_bits` bits, one 3-bit output per guess position.
[[nodiscard]] inline AttackCurve attack_success_curve(const TransitionMatrix& p, int key_bits,
                                                      std::span<const std::uint64_t> budgets) {
    if (key_bits < 3) throw std::invalid_argument("attack_success_curve: key_bits must be >= 3");
    AttackCurve curve;
    curve.key_bits = key_bits;
    curve.sequence_length = outputs_for_key(key_bits);
    const std::uint64_t space = sequence_space_size(curve.sequence_length);

    std::vector<std::uint64_t> order(budgets.begin(), budgets.end());
    for (auto b : order)
        if (b == 0) throw std::invalid_argument("attack_success_curve: budgets must be >= 1");
    std::sort(order.begin(), order.end());

    BestFirstEnumerator search(p, curve.sequence_length);
    BestFirstEnumerator::Emitted e{};
    std::uint64_t tried = 0;
    double cumulative = 0.0;
    bool exhausted = false;
    std::vector<AttackPoint> sorted_points;
    for (auto budget : order) {
        const std::uint64_t target = std::min(budget, space);
        while (tried < target && !exhausted) {
            if (!search.next(e)) {
                exhausted = true;
                break;
            }
            ++tried;
            cumulative += e.probability;
        }
        const bool all = target == space && tried == space;
        sorted_points.push_back({budget, all ? 1.0 : std::min(cumulative, 1.0)});
    }
    // Report in the caller's order.
    for (auto b : budgets) {
        const auto it = std::find_if(sorted_points.begin(), sorted_points.end(),
                                     [&](const AttackPoint& pt) { return pt.guess_budget == b; });
        curve.points.push_back(*it);
    }
    return curve;
}

/// True iff every query of length <= 3 keeps its probability when all symbols
/// are shifted by the same offset mod 8.
[[nodiscard]] inline bool shift_symmetry_check(const TransitionMatrix& p, double tol = 1e-12) {
    SymbolSequence q, shifted;
    for (std::size_t len = 1; len <= 3; ++len) {
        const std::uint64_t count = sequence_space_size(len);
        q.assign(len, 0);
        shifted.assign(len, 0);
        for (std::uint64_t code = 0; code < count; ++code) {
            for (std::size_t i = 0; i < len; ++i) q[i] = static_cast<std::uint8_t>((code >> (3 * i)) & 7);
            const double base = sequence_probability(p, q);
            for (int c = 1; c < kSymbolCount; ++c) {
                for (std::size_t i = 0; i < len; ++i)
                    shifted[i] = static_cast<std::uint8_t>((q[i] + c) % kSymbolCount);
                if (std::abs(sequence_probability(p, shifted) - base) > tol) return false;
            }
        }
    }
    return true;
}

[[nodiscard]] inline bool is_row_stochastic(const Matrix& m, double tol) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if ((m.row(i).array() < 0.0).any()) return false;
        if (std::abs(m.row(i).sum() - 1.0) > tol) return false;
    }
    return true;
}

[[nodiscard]] inline bool is_circulant(const Matrix& m, double tol) {
    const auto n = m.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (std::abs(m(i, j) - m((i + 1) % n, (j + 1) % n)) > tol) return false;
    return true;
}

[[nodiscard]] inline std::string sequence_to_bits(std::span<const std::uint8_t> symbols) {
    std::string s;
    s.reserve(3 * symbols.size());
    for (auto v : symbols)
        for (int b = 2; b >= 0; --b) s.push_back(((v >> b) & 1) ? '1' : '0');
    return s;
}

} // namespace trnglab
