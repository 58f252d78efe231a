#pragma once

namespace fedcw::sim {

/// Distance-dependent frame error probability.
///
/// p(d) = p_min + (p_max - p_min) * ((d - d_min) / (d_max - d_min))^shape,
/// evaluated on data frames only. Distances outside [d_min, d_max] are a
/// configuration fault.
struct ChannelErrorModel {
    double p_min = 0.01;
    double p_max = 0.15;
    double shape = 2.0;
    double d_min = 0.5;
    double d_max = 30.0;

    void validate() const;
    double frame_error_prob(double distance_m) const;
};

}  // namespace fedcw::sim
