#include "pqsched/queue_state.hpp"

#include <cassert>

namespace pqsched {

QueueState::QueueState(std::size_t num_classes, Partition partition)
    : k_(num_classes),
      partition_(partition),
      queues_(partition == Partition::Global ? 1 : num_classes),
      n_pred_(num_classes, 0),
      n_true_(num_classes, 0),
      n_kl_(num_classes * num_classes, 0) {}

std::size_t QueueState::queue_key(std::size_t true_class, std::size_t predicted) const noexcept {
  switch (partition_) {
    case Partition::PredictedClass: return predicted;
    case Partition::TrueClass: return true_class;
    case Partition::Global: return 0;
  }
  return predicted;
}

void QueueState::push(std::size_t job, std::size_t true_class, std::size_t predicted) {
  queues_[queue_key(true_class, predicted)].push_back(job);
  ++n_pred_[predicted];
  ++n_true_[true_class];
  ++n_kl_[true_class * k_ + predicted];
  ++total_;
}

void QueueState::pop_front(std::size_t queue, std::size_t true_class, std::size_t predicted) {
  assert(!queues_[queue].empty());
  queues_[queue].pop_front();
  --n_pred_[predicted];
  --n_true_[true_class];
  --n_kl_[true_class * k_ + predicted];
  --total_;
}

}  // namespace pqsched
