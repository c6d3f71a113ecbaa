#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hiper/critic/critic.hpp"
#include "hiper/hae/hae.hpp"
#include "hiper/policy/tables.hpp"

namespace hiper {

class MissingBehavior : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PpoRatios {
  std::optional<double> r_switch;
  std::optional<double> r_high;
  double r_low = 1.0;
};

// exp(live - behavior) per head present on the turn.
PpoRatios ppo_ratios(const PolicyParams& live, const TurnRecord& turn);

// One turn with everything PPO needs, fixed for the whole iteration.
struct TrainingTurn {
  TurnRecord turn;
  double a_low = 0.0;
  std::optional<double> a_switch;  // absent at t = 0 and on malformed turns
  std::optional<double> a_high;    // present on the first turn of each segment
  double y_low = 0.0;
  std::optional<double> y_high;
  double a_flat = 0.0;
  double y_flat = 0.0;
};

std::vector<TrainingTurn> make_training_turns(std::span<const Trajectory> batch,
                                              std::span<const HierarchicalAdvantages> adv,
                                              const ValueTables& tables, double gamma);
std::vector<TrainingTurn> make_flat_training_turns(std::span<const Trajectory> batch,
                                                   std::span<const std::vector<double>> a_flat,
                                                   const FlatValueTable& flat, double gamma);

// min(r A, clip(r, 1-eps, 1+eps) A) and its derivative in r.
double clipped_surrogate(double ratio, double adv, double eps);
double clipped_surrogate_slope(double ratio, double adv, double eps);

// Means over the turns. grad is d(value)/d(theta).
struct ActorLoss {
  double value = 0.0;
  double low = 0.0;
  double high = 0.0;
  double switch_ = 0.0;
  GradTables grad;
};

ActorLoss actor_loss(std::span<const TrainingTurn> turns, const PolicyParams& live, double eps);
// One surrogate on the joint ratio of all heads present at the turn.
ActorLoss flat_actor_loss(std::span<const TrainingTurn> turns, const PolicyParams& live,
                          double eps);

double categorical_kl(std::span<const double> logits, std::span<const double> ref_logits);

struct KlPenalty {
  double value = 0.0;
  GradTables grad;
};

// Exact KL(pi_theta || pi_ref) summed over the heads present at each turn,
// averaged over turns.
KlPenalty kl_penalty(const PolicyParams& live, const PolicyParams& ref,
                     std::span<const TrainingTurn> turns);

struct CriticLoss {
  double value = 0.0;
  double high = 0.0;
  double low = 0.0;
  ValueTables grad;
};

CriticLoss critic_loss(const ValueTables& tables, std::span<const TrainingTurn> turns);

struct FlatCriticLoss {
  double value = 0.0;
  FlatValueTable grad;
};

FlatCriticLoss flat_critic_loss(const FlatValueTable& table, std::span<const TrainingTurn> turns);

struct LossWeights {
  double clip_eps = 0.2;
  double c_v = 0.5;
  double kl_beta = 0.01;
};

// value = -L_actor + c_v L_V + kl_beta KL; gradients are of value.
struct TotalLoss {
  double value = 0.0;
  double actor = 0.0;
  double critic = 0.0;
  double kl = 0.0;
  GradTables actor_grad;
  ValueTables critic_grad;
};

TotalLoss total_loss(const PolicyParams& live, const PolicyParams& ref, const ValueTables& tables,
                     std::span<const TrainingTurn> turns, const LossWeights& w);

struct FlatTotalLoss {
  double value = 0.0;
  double actor = 0.0;
  double critic = 0.0;
  double kl = 0.0;
  GradTables actor_grad;
  FlatValueTable critic_grad;
};

FlatTotalLoss flat_total_loss(const PolicyParams& live, const PolicyParams& ref,
                              const FlatValueTable& table, std::span<const TrainingTurn> turns,
                              const LossWeights& w);

}  // namespace hiper
