#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fedcw/env.hpp"
#include "fedcw/rng.hpp"

namespace fedcw::rl {

/// One MDP step: state, pre-discretization actor output, reward, next state.
struct Transition {
    env::StateVector s;
    double a = 0.0;
    double r = 0.0;
    env::StateVector s_next;
};

/// Fixed-capacity ring; oldest entries overwritten first.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity = 2000) : storage_(capacity), capacity_(capacity) {
        if (capacity == 0) {
            throw std::invalid_argument("ReplayBuffer: zero capacity");
        }
    }

    void insert(const Transition& t) {
        storage_[head_] = t;
        head_ = (head_ + 1) % capacity_;
        if (size_ < capacity_) {
            ++size_;
        }
    }

    const Transition& sample(RngStream& rng) const {
        return at(static_cast<std::size_t>(rng.below(size_)));
    }

    /// Logical index 0 = oldest retained transition.
    const Transition& at(std::size_t logical) const {
        const std::size_t start = (size_ < capacity_) ? 0 : head_;
        return storage_[(start + logical) % capacity_];
    }

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }

  private:
    std::vector<Transition> storage_;
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
};

}  // namespace fedcw::rl
