#include "advprobe/embed/chinese_whispers.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "advprobe/common/rng.hpp"

namespace advprobe::embed {

std::vector<int> chinese_whispers(const Eigen::MatrixXd& vectors,
                                  const ChineseWhispersOptions& opt) {
  if (!(opt.critical_distance > 0.0))
    throw std::invalid_argument("critical distance must be positive");
  const auto n = static_cast<std::size_t>(vectors.rows());
  const Eigen::MatrixXd vt = vectors.transpose();
  const double limit = opt.critical_distance * opt.critical_distance;

  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((vt.col(static_cast<Eigen::Index>(i)) - vt.col(static_cast<Eigen::Index>(j)))
              .squaredNorm() <= limit) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }

  std::vector<int> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = static_cast<int>(i);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  CounterRng rng(derive_seed({opt.seed, 0x6377}));
  auto pick = [&](std::size_t bound) {
    return static_cast<std::size_t>(rng.uniform() * static_cast<double>(bound));
  };

  std::unordered_map<int, int> counts;
  std::vector<int> best;
  for (int it = 0; it < opt.max_iterations; ++it) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[pick(i)]);
    std::size_t changes = 0;
    for (std::size_t node : order) {
      if (adj[node].empty()) continue;
      counts.clear();
      for (std::size_t nb : adj[node]) ++counts[label[nb]];
      int top = 0;
      best.clear();
      for (const auto& [l, c] : counts) {
        if (c > top) {
          top = c;
          best.assign(1, l);
        } else if (c == top) {
          best.push_back(l);
        }
      }
      // Hash-map order is unspecified; sort so the seeded tie-break is stable.
      std::sort(best.begin(), best.end());
      const int chosen = best.size() == 1 ? best[0] : best[pick(best.size())];
      if (chosen != label[node]) {
        label[node] = chosen;
        ++changes;
      }
    }
    if (static_cast<double>(changes) < opt.convergence_fraction * static_cast<double>(n)) break;
  }

  std::unordered_map<int, int> renumber;
  for (int& l : label) {
    auto [it, inserted] = renumber.try_emplace(l, static_cast<int>(renumber.size()));
    l = it->second;
  }
  return label;
}

}  // namespace advprobe::embed
