#pragma once

#include "kld/histogram.hpp"

namespace kld {

enum class LogBase { natural, base2 };

/// Policy for terms where the baseline density vanishes under a non-zero
/// local mass. `jensen_shannon` is an alias mode that swaps the whole
/// evaluation for the symmetric 1/2 D(P||M) + 1/2 D(Q||M) divergence on the
/// unified support, M = (P+Q)/2; it is always finite and meant for
/// baseline-vs-noise comparisons, not as a separate filter.
struct Smoothing {
    enum class Mode { skip_zero_terms, additive_epsilon, none, jensen_shannon };

    Mode mode = Mode::skip_zero_terms;
    double epsilon = 0.0;

    static Smoothing skip() { return {Mode::skip_zero_terms, 0.0}; }
    static Smoothing additive(double eps);
    static Smoothing none() { return {Mode::none, 0.0}; }
    static Smoothing jensen_shannon() { return {Mode::jensen_shannon, 0.0}; }
};

/// Relative entropy D(p||q) between two binned distributions that may use
/// different bin grids: sum of p_mass[n] * log(p_mass[n] / q_mass(r_n)) where
/// q's mass is looked up at the representative r_n of p's bin n (the bin's
/// smallest sample, so quantized readings resolve to their exact baseline
/// bin). Zero-mass terms contribute nothing; zero-denominator terms follow
/// the smoothing policy. Two point masses at the same value diverge by 0.
double kl_divergence(const Pmf& p, const Pmf& q,
                     const Smoothing& smoothing = Smoothing::skip(),
                     LogBase base = LogBase::natural);

/// -sum(mass * log(mass)) with 0 log 0 = 0; lies in [0, log(bins)].
double shannon_entropy(const Pmf& p, LogBase base = LogBase::natural);

/// Symmetric smoothed divergence on the union of both supports; always
/// finite, bounded by log 2.
double jensen_shannon_divergence(const Pmf& p, const Pmf& q,
                                 LogBase base = LogBase::natural);

} // namespace kld
