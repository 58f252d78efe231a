#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace fedcw::sim {

/// Deterministic event queue: dispatch order is (timestamp, insertion seq).
class SimClock {
  public:
    using Event = std::function<void()>;

    /// Enqueue an event; scheduling in the past is a programming fault.
    void schedule(std::int64_t at_us, Event fn);

    /// Dispatch the earliest pending event; false when the queue is empty.
    bool dispatch_next();

    std::int64_t now() const { return now_; }
    std::size_t pending() const { return heap_.size(); }

    /// Timestamp of the earliest pending event, if any.
    std::optional<std::int64_t> next_time() const {
        if (heap_.empty()) return std::nullopt;
        return heap_.front().at;
    }

  private:
    struct Entry {
        std::int64_t at;
        std::uint64_t seq;
        Event fn;
    };
    static bool later(const Entry& a, const Entry& b) {
        return a.at > b.at || (a.at == b.at && a.seq > b.seq);
    }

    std::vector<Entry> heap_;
    std::int64_t now_ = 0;
    std::uint64_t next_seq_ = 0;
};

}  // namespace fedcw::sim
