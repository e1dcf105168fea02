#pragma once

#include <span>
#include <utility>
#include <vector>

#include "saldet/dataset.hpp"
#include "saldet/geometry.hpp"

namespace saldet {

/// Focal loss hyperparameters: alpha_fl balances the loss against other
/// terms, gamma controls how hard easy examples are down-weighted.
struct FocalParams {
    double alpha_fl = 0.25;
    double gamma = 2.0;
};

/// Checks alpha_fl > 0, gamma >= 0, both finite; throws ConfigError.
void validate(const FocalParams& fp);

/// Salience weighting: candidates whose nearest ground-truth sign is
/// salient have their loss scaled by alpha_ss; everyone else (and every
/// candidate in an image without ground truth) keeps background_weight.
struct SalienceParams {
    double alpha_ss = 4.0;
    static constexpr double background_weight = 1.0;
};

/// Checks alpha_ss >= 1 and finite; throws ConfigError.
void validate(const SalienceParams& sp);

inline constexpr double kDefaultProbEpsilon = 1e-7;

/// Predicted probability of the ground-truth class, clamped from below at
/// epsilon so the log never reaches -inf. Valid range after clamping is
/// (0, 1].
class Probability {
public:
    explicit Probability(double raw, double epsilon = kDefaultProbEpsilon);

    double value() const { return p_; }

private:
    double p_;
};

/// -alpha_fl * (1 - p)^gamma * log(p). Non-negative; zero iff p == 1;
/// strictly decreasing in p.
double focal_loss(Probability p, const FocalParams& fp);

/// Derivative of focal_loss with respect to p:
///   alpha_fl * gamma * (1-p)^(gamma-1) * log(p) - alpha_fl * (1-p)^gamma / p
/// The first term is taken as exactly zero when gamma == 0, and by
/// continuous extension at p == 1.
double focal_loss_grad(Probability p, const FocalParams& fp);

/// Weight for a candidate box: alpha_ss when the annotation with the
/// smallest center distance to d is salient, 1 otherwise. Distance ties
/// break toward the lexicographically lowest annotation id. An empty
/// ground-truth list yields background_weight.
double salience_weight(const Box& d, std::span<const SignAnnotation> gts,
                       const SalienceParams& sp);

/// Salience-sensitive focal loss: salience_weight(d) * focal_loss(p).
double ssfl(Probability p, const Box& d, std::span<const SignAnnotation> gts,
            const FocalParams& fp, const SalienceParams& sp);

enum class LossMode {
    FL,   ///< plain focal loss; salience weights are ignored
    SSFL, ///< salience-sensitive focal loss
};

LossMode loss_mode_from_string(std::string_view s);
std::string_view to_string(LossMode mode);

struct BatchLossResult {
    double total = 0.0;                 ///< mean of per-candidate weighted losses
    std::vector<double> gradients;      ///< d total / d p_i, one per candidate
};

/// Mean weighted focal loss over parallel spans of probabilities and
/// per-candidate weights; summation runs in input order. The per-candidate
/// gradient is weight_i * focal_loss_grad(p_i) / n. This is the reduction
/// shared by batch_loss and the trainer.
BatchLossResult weighted_focal_batch(std::span<const Probability> ps,
                                     std::span<const double> weights, const FocalParams& fp);

struct LossCandidate {
    Probability p;
    Box box;
};

/// Mean loss over a candidate list. FL mode weights every candidate 1;
/// SSFL mode weights each candidate by its salience_weight against gts.
BatchLossResult batch_loss(std::span<const LossCandidate> candidates,
                           std::span<const SignAnnotation> gts, const FocalParams& fp,
                           const SalienceParams& sp, LossMode mode);

} // namespace saldet
