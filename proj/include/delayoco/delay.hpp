#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "delayoco/losses.hpp"
#include "delayoco/rng.hpp"

namespace delayoco {

/// Per-round delays d_1..d_T (1-based rounds). Feedback queried at round k is
/// received at the end of round k + d_k - 1.
class DelaySchedule {
 public:
  DelaySchedule() = default;
  explicit DelaySchedule(std::vector<int> delays) : delays_(std::move(delays)) {
    if (delays_.empty()) throw InvalidInput("delay schedule needs T >= 1");
    for (int d : delays_)
      if (d < 1) throw InvalidInput("every delay must be >= 1");
  }

  int horizon() const { return static_cast<int>(delays_.size()); }
  /// Delay of round t (1-based).
  int delay(int t) const { return delays_.at(static_cast<std::size_t>(t - 1)); }
  const std::vector<int>& delays() const { return delays_; }
  /// Round whose end delivers the feedback of round k.
  int arrival_round(int k) const { return k + delay(k) - 1; }

  /// D_T
  long long total_delay() const {
    long long s = 0;
    for (int d : delays_) s += d;
    return s;
  }
  /// d = max_t d_t
  int max_delay() const { return *std::max_element(delays_.begin(), delays_.end()); }

  bool operator==(const DelaySchedule&) const = default;

 private:
  std::vector<int> delays_;
};

struct DelayMode {
  enum class Kind { Fixed, UniformRandom };
  Kind kind = Kind::UniformRandom;
  int value = 1;  // d-bar for Fixed, d_max for UniformRandom

  static DelayMode fixed(int d) { return {Kind::Fixed, d}; }
  static DelayMode uniform(int d_max) { return {Kind::UniformRandom, d_max}; }
};

inline DelaySchedule generate_schedule(DelayMode mode, int T, std::uint64_t seed) {
  if (T <= 0) throw InvalidInput("horizon T must be positive");
  if (mode.value < 1) throw InvalidInput("delay parameter must be >= 1");
  std::vector<int> d(static_cast<std::size_t>(T), mode.value);
  if (mode.kind == DelayMode::Kind::UniformRandom) {
    CounterRng rng(seed, streams::kDelays);
    for (int& v : d) v = static_cast<int>(rng.uniform_int(1, mode.value));
  }
  return DelaySchedule(std::move(d));
}

/// F_t: origin rounds whose feedback is received at the end of round t, ascending.
struct ArrivalSet {
  int round = 0;
  std::vector<int> members;

  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
  /// i_k = |{s in F_t : s < k}|
  int position(int k) const {
    return static_cast<int>(std::lower_bound(members.begin(), members.end(), k) - members.begin());
  }
};

struct ArrivalPlan {
  std::vector<ArrivalSet> sets;  // sets[t-1] is F_t
  int tail_dropped = 0;          // rounds whose feedback matures after T

  const ArrivalSet& at(int t) const { return sets.at(static_cast<std::size_t>(t - 1)); }
};

inline ArrivalPlan arrival_sets(const DelaySchedule& s) {
  const int T = s.horizon();
  ArrivalPlan plan;
  plan.sets.resize(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) plan.sets[static_cast<std::size_t>(t - 1)].round = t;
  for (int k = 1; k <= T; ++k) {
    const int t = s.arrival_round(k);
    if (t > T) ++plan.tail_dropped;
    else plan.sets[static_cast<std::size_t>(t - 1)].members.push_back(k);
  }
  return plan;
}

/// sum_t sum_{k in F_t} ( sum_{tau=k}^{t-1} |F_tau| + |F_{t,k}| ), by direct
/// enumeration. Bounded by 2 D_T.
inline long long lemma3_sum(const DelaySchedule& s) {
  const ArrivalPlan plan = arrival_sets(s);
  long long total = 0;
  for (const ArrivalSet& F : plan.sets) {
    for (std::size_t i = 0; i < F.members.size(); ++i) {
      const int k = F.members[i];
      for (int tau = k; tau <= F.round - 1; ++tau) total += static_cast<long long>(plan.at(tau).size());
      total += static_cast<long long>(i);
    }
  }
  return total;
}

/// Schedule CSV: header "t,d_t", one row per round.
inline void write_schedule_csv(const DelaySchedule& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "t,d_t\n";
  for (int t = 1; t <= s.horizon(); ++t) out << t << ',' << s.delay(t) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline DelaySchedule read_schedule_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,d_t", 0) != 0) throw IoError(path + ": missing t,d_t header");
  std::vector<int> d;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    int t = 0, dt = 0;
    char comma = 0;
    if (!(row >> t >> comma >> dt) || comma != ',') throw IoError(path + ": malformed row '" + line + "'");
    if (t != static_cast<int>(d.size()) + 1) throw IoError(path + ": rounds must be consecutive from 1");
    d.push_back(dt);
  }
  return DelaySchedule(std::move(d));
}

/// Feedback payloads, one per information model.
struct FullLoss {
  LossFunction loss;
};
struct GradientFn {
  LossFunction loss;
};
struct GradientValue {
  Vector value;
};
using FeedbackPayload = std::variant<FullLoss, GradientFn, GradientValue>;

struct FeedbackItem {
  int origin_round = 0;
  FeedbackPayload payload;
};

/// Queue realization of the arrival rule. Items are pushed once per round in
/// increasing round order; pop(t) hands back exactly the items with
/// k + d_k - 1 = t, ascending in k, each exactly once.
template <class Item = FeedbackItem>
class FeedbackBuffer {
 public:
  explicit FeedbackBuffer(int horizon) : buckets_(static_cast<std::size_t>(horizon)) {}

  void push(int origin_round, int delay, Item item) {
    if (origin_round <= last_pushed_)
      throw InvalidInput("feedback pushed out of order: round " + std::to_string(origin_round) + " after " +
                         std::to_string(last_pushed_));
    if (delay < 1) throw InvalidInput("delay must be >= 1");
    last_pushed_ = origin_round;
    const int t = origin_round + delay - 1;
    if (t > static_cast<int>(buckets_.size())) {
      ++tail_;
      return;
    }
    buckets_[static_cast<std::size_t>(t - 1)].push_back(std::move(item));
  }

  std::vector<Item> pop(int round) {
    if (round <= last_popped_ || round < 1 || round > static_cast<int>(buckets_.size()))
      throw InvalidInput("feedback popped out of order at round " + std::to_string(round));
    last_popped_ = round;
    return std::move(buckets_[static_cast<std::size_t>(round - 1)]);
  }

  /// push(t, d_t, item) then pop(t).
  std::vector<Item> route(int round, int delay, Item item) {
    push(round, delay, std::move(item));
    return pop(round);
  }

  /// Items that mature after the horizon and will never be delivered.
  int tail_dropped() const { return tail_; }

 private:
  std::vector<std::vector<Item>> buckets_;
  int last_pushed_ = 0;
  int last_popped_ = 0;
  int tail_ = 0;
};

}  // namespace delayoco
