#pragma once

#include "scoregan/common.hpp"
#include "scoregan/discriminator.hpp"
#include "scoregan/generator.hpp"
#include "scoregan/tape.hpp"

#include <utility>

namespace scoregan {

// Exact information-gain math on small discrete distributions. All values
// are in nats.

/// H(p) = -sum p log p, with 0 log 0 = 0.
Scalar entropy(const Vector& dist);

/// I(C; X) = H(C) - H(C|X) for a joint p(c, x) given as a C x X matrix.
Scalar mutual_information(const Matrix& joint);

/// Variational lower bound L = E_{(c,x)~p}[log q(c|x)] + H(C), where q is a
/// column-stochastic C x X conditional table. Returns -inf when q(c|x) = 0 on
/// an outcome with positive mass; that is a value, not an error.
Scalar variational_lower_bound(const Matrix& joint, const Matrix& q);

/// Both sides of the resampling identity
///   E_{x,y~p}[f(x,y)] = E_{x,y~p, x'~X|y}[f(x',y)]
/// computed exactly from a finite joint over (X, Y); f is an X x Y table.
std::pair<Scalar, Scalar> lemma_expectation_check(const Matrix& f, const Matrix& joint);

struct IgmEstimate {
  Var value;  // scalar on the caller's tape: mean log Q(c|x) + ln C
  std::vector<SampledSequence> samples;
};

/// Monte-Carlo estimate of the regularizer L(G, Q): draw c uniformly, sample
/// x ~ G(z, c), and average log Q(c|x) from the Df Q head, plus the constant
/// H(c) = ln C. The returned scalar's backward pass reaches the Q head
/// directly and the generator through a score-function surrogate whose
/// per-sample reward is log Q(c|x) + ln C.
IgmEstimate igm_regularizer_estimate(Tape& tape, GeneratorModel& gen,
                                     DiscriminatorModel& df,
                                     const EmbeddingTable& embeddings,
                                     int batch_size, Rng& rng,
                                     bool surrogate_baseline = true);

}  // namespace scoregan
