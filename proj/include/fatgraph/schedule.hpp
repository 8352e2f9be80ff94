#pragma once

#include "fatgraph/error.hpp"
#include "fatgraph/rat.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fatgraph {

using Step = std::int64_t;

/// One stage of the construction: m uniform steps followed by n
/// redistributing steps.
struct Stage {
    int m = 3;
    int n = 3;

    friend bool operator==(const Stage&, const Stage&) = default;
};

/// Rectangle lineages are stored as bit masks, one bit per stage.
inline constexpr int kMaxStages = 63;

/// Validated construction parameters. Immutable once built; q is always
/// derived from p.
class Params {
public:
    /// Checks 0 < p < 1, odd m_k, n_k >= 3 and that every construction
    /// rectangle height stays positive.
    static Params validate(const Rat& p, std::vector<Stage> stages) {
        if (p <= Rat(0) || p >= Rat(1)) {
            fail(Errc::RejectP, "p must lie in (0,1), got " + p.str());
        }
        if (stages.size() > static_cast<std::size_t>(kMaxStages)) {
            fail(Errc::InvalidArgument, "at most 63 stages are supported");
        }
        for (std::size_t k = 0; k < stages.size(); ++k) {
            const Stage& s = stages[k];
            if (s.m < 3 || s.n < 3 || s.m % 2 == 0 || s.n % 2 == 0) {
                fail(Errc::RejectParity, "stage " + std::to_string(k + 1) + " has (m,n) = (" +
                                             std::to_string(s.m) + "," + std::to_string(s.n) +
                                             "); both must be odd and >= 3");
            }
        }

        Params out;
        out.p_ = p;
        out.stages_ = std::move(stages);
        out.M_.assign(1, 0);
        out.heights_.assign(1, Rat(1));
        for (std::size_t k = 0; k < out.stages_.size(); ++k) {
            const Stage& s = out.stages_[k];
            Step last_uniform = out.M_.back() + s.m;
            Rat h = out.heights_.back() / Rat(2) - Rat(2) * inv_pow4(last_uniform);
            if (h <= Rat(0)) {
                fail(Errc::RejectHeight, "construction rectangles of level " + std::to_string(k + 1) +
                                             " would have non-positive height " + h.str());
            }
            out.M_.push_back(out.M_.back() + s.m + s.n);
            out.heights_.push_back(std::move(h));
        }
        return out;
    }

    const Rat& p() const { return p_; }
    Rat q() const { return Rat(2) - p_; }

    int stage_count() const { return static_cast<int>(stages_.size()); }
    const std::vector<Stage>& stages() const { return stages_; }
    /// 1-based.
    const Stage& stage(int k) const { return stages_.at(static_cast<std::size_t>(k - 1)); }

    /// M_k = sum_{j<=k} (m_j + n_j), M_0 = 0.
    Step M(int k) const { return M_.at(static_cast<std::size_t>(k)); }
    Step total_steps() const { return M_.back(); }
    /// Last uniform step of stage k: M_{k-1} + m_k.
    Step last_uniform(int k) const { return M(k - 1) + stage(k).m; }
    /// Height of every level-k construction rectangle.
    const Rat& height(int k) const { return heights_.at(static_cast<std::size_t>(k)); }

    friend bool operator==(const Params& a, const Params& b) {
        return a.p_ == b.p_ && a.stages_ == b.stages_;
    }

private:
    Params() = default;

    Rat p_;
    std::vector<Stage> stages_;
    std::vector<Step> M_;
    std::vector<Rat> heights_;
};

struct Phase {
    enum class Kind { Uniform, NonUniform };

    int stage = 1;
    Kind kind = Kind::Uniform;
    /// 1-based position inside the uniform run, or t with i = M_{k-1} + m_k + t.
    int offset = 1;

    friend bool operator==(const Phase&, const Phase&) = default;
};

inline Phase phase_of_step(Step i, const Params& params) {
    if (i < 1 || i > params.total_steps()) {
        fail(Errc::OutOfRange, "step " + std::to_string(i) + " outside (0, M_K = " +
                                   std::to_string(params.total_steps()) + "]");
    }
    int k = 1;
    while (params.M(k) < i) ++k;
    Step within = i - params.M(k - 1);
    if (within <= params.stage(k).m) {
        return Phase{k, Phase::Kind::Uniform, static_cast<int>(within)};
    }
    return Phase{k, Phase::Kind::NonUniform, static_cast<int>(within - params.stage(k).m)};
}

inline int stage_of_step(Step i, const Params& params) { return phase_of_step(i, params).stage; }

/// Planner output keeps per-stage budgets eps * 2^{-(k+2)} so the infinite
/// series would converge as well.
inline Params plan_schedule(const Rat& epsilon, int stage_count) {
    if (epsilon <= Rat(0)) fail(Errc::RejectEps, "epsilon must be positive, got " + epsilon.str());
    if (stage_count < 0 || stage_count > kMaxStages) {
        fail(Errc::InvalidArgument, "stage count must lie in [0, 63]");
    }

    // q/p = 2/p - 1, so p = 2/(2+eps) gives exactly 1+eps; never go below 1/2.
    Rat p = max(Rat(2) / (Rat(2) + epsilon), Rat(1, 2));
    Rat pq = p * (Rat(2) - p);

    std::vector<Stage> stages;
    for (int k = 1; k <= stage_count; ++k) {
        Rat budget = epsilon / pow(Rat(2), k + 2);

        int n = 3;
        Rat tail = pq / Rat(2); // 1/2 (pq)^{(n-1)/2} at n = 3
        while (tail > budget) {
            n += 2;
            tail *= pq;
        }

        int m = 3;
        Rat leftover = Rat(1, 16); // 4^{-(m-1)} at m = 3
        while (leftover > budget) {
            m += 2;
            leftover /= Rat(16);
        }
        stages.push_back(Stage{m, n});
    }
    return Params::validate(p, std::move(stages));
}

} // namespace fatgraph
