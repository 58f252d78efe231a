#pragma once

#include <cstdint>
#include <stdexcept>

namespace fedcw::sim {

/// MAC-layer timing constants, all in microseconds.
///
/// Defaults describe an OFDM PHY with 9us slots. The ACK timeout equals
/// sifs + ack so a failed exchange occupies the medium for exactly as long
/// as a successful one; keep that property unless deliberately modelling
/// asymmetric recovery.
struct MacTiming {
    std::int64_t slot_us = 9;
    std::int64_t sifs_us = 16;
    std::int64_t difs_us = 34;  // must equal sifs + 2*slot
    std::int64_t ack_us = 28;
    std::int64_t rts_us = 32;
    std::int64_t cts_us = 28;
    std::int64_t ack_timeout_us = 44;  // >= sifs + ack
    double data_rate_mbps = 120.0;

    void validate() const {
        if (slot_us <= 0 || sifs_us <= 0 || ack_us <= 0 || rts_us <= 0 || cts_us <= 0)
            throw std::invalid_argument("MacTiming: durations must be positive");
        if (difs_us != sifs_us + 2 * slot_us)
            throw std::invalid_argument("MacTiming: difs must equal sifs + 2*slot");
        if (ack_timeout_us < sifs_us + ack_us)
            throw std::invalid_argument("MacTiming: ack timeout shorter than sifs + ack");
        if (data_rate_mbps <= 0.0)
            throw std::invalid_argument("MacTiming: data rate must be positive");
    }

    /// Airtime of a payload-bearing data frame, rounded up to whole us.
    std::int64_t data_airtime_us(int payload_bytes) const {
        if (payload_bytes <= 0) throw std::invalid_argument("MacTiming: payload must be positive");
        const double bits = 8.0 * static_cast<double>(payload_bytes);
        const double us = bits / data_rate_mbps;
        auto t = static_cast<std::int64_t>(us);
        if (static_cast<double>(t) < us) ++t;
        return t;
    }
};

}  // namespace fedcw::sim
