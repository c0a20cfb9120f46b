#include "advprobe/transfer/transfer.hpp"

#include <map>
#include <ostream>
#include <stdexcept>

#include "advprobe/attack/feasible.hpp"
#include "advprobe/attack/fgsm.hpp"
#include "advprobe/common/parallel.hpp"
#include "common/json_io.hpp"

namespace advprobe::transfer {

using detail::json;

env::MultiDiscreteAction max_loss_win_action(const data::Dataset& dataset) {
  if (dataset.records.empty()) throw InputError("max(loss - win) on an empty dataset");
  std::map<env::MultiDiscreteAction, long long> score;
  bool decided = false;
  for (const auto& ep : dataset.episodes) {
    const auto outcome = ep.final_properties.win;
    if (outcome == env::Outcome::Undecided) continue;
    decided = true;
    const long long delta = outcome == env::Outcome::Loss ? 1 : -1;
    for (std::size_t r = ep.first_record; r < ep.first_record + ep.record_count; ++r)
      score[dataset.records.at(r).action] += delta;
  }
  if (!decided) throw InputError("dataset has no won or lost episode");
  // std::map iterates in lexicographic order, so the first maximum wins ties.
  auto best = score.begin();
  for (auto it = score.begin(); it != score.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

double subaction_match_fraction(const env::MultiDiscreteAction& induced,
                                const env::MultiDiscreteAction& target) {
  if (induced.size() != target.size())
    throw std::invalid_argument("sub-action match on actions of different arity");
  if (induced.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t k = 0; k < induced.size(); ++k) same += induced[k] == target[k];
  return static_cast<double>(same) / static_cast<double>(induced.size());
}

const char* target_kind_name(TargetKind k) {
  return k == TargetKind::NoOp ? "noop" : "max_loss_win";
}

ActionTargets action_targets_for(const data::Dataset& source_dataset) {
  ActionTargets t;
  t.max_loss_win = max_loss_win_action(source_dataset);
  t.noop.assign(t.max_loss_win.size(), 0);
  return t;
}

namespace {

struct Partial {
  std::size_t attacks = 0, source_sufficient = 0, transferable = 0, target_transferable = 0,
              target_differs = 0;
  double subaction_sum = 0.0;
};

}  // namespace

std::vector<TransferCell> run_transfer_matrix(std::span<const train::FrozenPolicy> policies,
                                              std::span<const data::Dataset> datasets,
                                              std::span<const ActionTargets> targets,
                                              const env::ScenarioConfig& config,
                                              const TransferOptions& opt) {
  if (datasets.size() != policies.size())
    throw InputError("transfer matrix needs one dataset per policy");
  if (targets.size() != policies.size())
    throw InputError("transfer matrix needs action targets for every source policy");
  for (std::size_t j = 0; j < policies.size(); ++j) {
    policies[j].check();
    if (datasets[j].policy_tag != policies[j].tag)
      throw InputError("dataset for '" + policies[j].tag + "' was collected by '" +
                       datasets[j].policy_tag + "'");
  }
  const auto feasible = attack::feasible_table(config);
  const std::vector<std::size_t> indices =
      opt.indices.empty() ? attack::perturbable_indices(config) : opt.indices;

  // Unattacked actions of every policy on every dataset, computed once.
  std::vector<std::vector<std::vector<env::MultiDiscreteAction>>> base(policies.size());
  for (std::size_t p = 0; p < policies.size(); ++p) {
    base[p].resize(datasets.size());
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      const auto& recs = datasets[d].records;
      base[p][d].resize(recs.size());
      parallel_for(recs.size(), opt.workers, [&](std::size_t r) {
        base[p][d][r] = train::select_action(policies[p], recs[r].obs);
      });
    }
  }

  std::vector<TransferCell> cells;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    for (std::size_t j = 0; j < policies.size(); ++j) {
      for (TargetKind kind : {TargetKind::NoOp, TargetKind::MaxLossWin}) {
        const auto& target = targets[i].get(kind);
        const auto& recs = datasets[j].records;
        std::vector<Partial> parts(recs.size());
        parallel_for(recs.size(), opt.workers, [&](std::size_t r) {
          const auto& obs = recs[r].obs;
          const Eigen::VectorXd g = attack::targeted_gradient(policies[i], obs, target);
          const auto on_target = attack::perturb_indices(policies[j], feasible, obs, g, indices,
                                                         opt.epsilon, base[j][j][r]);
          const auto on_source =
              i == j ? on_target
                     : attack::perturb_indices(policies[i], feasible, obs, g, indices,
                                               opt.epsilon, base[i][j][r]);
          Partial& p = parts[r];
          const bool differs = target != base[j][j][r];
          for (std::size_t k = 0; k < on_target.size(); ++k) {
            const auto& adv = on_target[k];
            ++p.attacks;
            p.source_sufficient += on_source[k].sufficient;
            p.transferable += adv.sufficient;
            p.target_transferable += adv.sufficient && adv.induced_action == target;
            p.target_differs += differs;
            p.subaction_sum += subaction_match_fraction(adv.induced_action, target);
          }
        });
        TransferCell cell;
        cell.source_tag = policies[i].tag;
        cell.target_tag = policies[j].tag;
        cell.kind = kind;
        cell.action_target = target;
        for (const auto& p : parts) {
          cell.attacks += p.attacks;
          cell.source_sufficient += p.source_sufficient;
          cell.transferable += p.transferable;
          cell.target_transferable += p.target_transferable;
          cell.target_differs += p.target_differs;
          cell.subaction_sum += p.subaction_sum;
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

void write_transfer_table(std::ostream& out, double epsilon,
                          const std::vector<TransferCell>& cells) {
  detail::write_line(out, json{{"format", kTransferFormat},
                               {"version", kTransferVersion},
                               {"epsilon", epsilon},
                               {"count", cells.size()}});
  for (const auto& c : cells)
    detail::write_line(out, json{{"source", c.source_tag},
                                 {"target", c.target_tag},
                                 {"action_target_kind", target_kind_name(c.kind)},
                                 {"action_target", c.action_target},
                                 {"transfer_rate", c.transfer_rate()},
                                 {"target_transfer_per_million", c.target_per_million()},
                                 {"subaction_match", c.subaction_match()},
                                 {"attacks", c.attacks},
                                 {"source_sufficient", c.source_sufficient},
                                 {"transferable", c.transferable},
                                 {"target_transferable", c.target_transferable},
                                 {"target_differs", c.target_differs}});
}

}  // namespace advprobe::transfer
