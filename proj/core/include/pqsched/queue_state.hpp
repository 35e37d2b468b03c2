#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

namespace pqsched {

/// How jobs are grouped into FIFO queues. Predicted-class policies only see
/// PredictedClass queues; the oracle needs TrueClass; FCFS uses one Global queue.
enum class Partition { PredictedClass, TrueClass, Global };

/// Observable state of the single server: one FIFO per queue key holding job
/// indices (the in-service job, if any, is the head of its queue), plus the
/// per-(true, predicted) counts used for composition diagnostics.
class QueueState {
 public:
  QueueState(std::size_t num_classes, Partition partition);

  Partition partition() const noexcept { return partition_; }
  std::size_t num_classes() const noexcept { return k_; }
  std::size_t num_queues() const noexcept { return queues_.size(); }

  std::size_t queue_length(std::size_t queue) const noexcept { return queues_[queue].size(); }
  const std::deque<std::size_t>& queue(std::size_t q) const noexcept { return queues_[q]; }
  std::size_t predicted_length(std::size_t l) const noexcept { return n_pred_[l]; }
  std::size_t true_length(std::size_t k) const noexcept { return n_true_[k]; }
  std::size_t composition(std::size_t k, std::size_t l) const noexcept { return n_kl_[k * k_ + l]; }
  std::size_t total() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }

  std::size_t queue_key(std::size_t true_class, std::size_t predicted) const noexcept;

  void push(std::size_t job, std::size_t true_class, std::size_t predicted);
  /// Removes the head of `queue`, which must be the job of the given classes.
  void pop_front(std::size_t queue, std::size_t true_class, std::size_t predicted);

  std::optional<std::size_t> in_service;  // job index
  double clock = 0.0;

 private:
  std::size_t k_;
  Partition partition_;
  std::vector<std::deque<std::size_t>> queues_;
  std::vector<std::size_t> n_pred_;
  std::vector<std::size_t> n_true_;
  std::vector<std::size_t> n_kl_;
  std::size_t total_ = 0;
};

}  // namespace pqsched
