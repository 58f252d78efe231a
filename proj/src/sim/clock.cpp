#include "fedcw/sim/clock.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

namespace fedcw::sim {

void SimClock::schedule(std::int64_t at_us, Event fn) {
    if (at_us < now_) {
        throw std::logic_error("SimClock: scheduling at " + std::to_string(at_us) +
                               "us, before now=" + std::to_string(now_) + "us");
    }
    heap_.push_back(Entry{at_us, next_seq_++, std::move(fn)});
    std::push_heap(heap_.begin(), heap_.end(), later);
}

bool SimClock::dispatch_next() {
    if (heap_.empty()) return false;
    std::pop_heap(heap_.begin(), heap_.end(), later);
    Entry e = std::move(heap_.back());
    heap_.pop_back();
    now_ = e.at;
    e.fn();
    return true;
}

}  // namespace fedcw::sim
