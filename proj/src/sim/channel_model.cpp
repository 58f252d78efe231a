#include "fedcw/sim/channel_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fedcw::sim {

void ChannelErrorModel::validate() const {
    if (!(d_min > 0.0) || !(d_max > d_min))
        throw std::invalid_argument("ChannelErrorModel: need 0 < d_min < d_max");
    if (p_min < 0.0 || p_max > 1.0 || p_min > p_max)
        throw std::invalid_argument("ChannelErrorModel: need 0 <= p_min <= p_max <= 1");
    if (!(shape > 0.0)) throw std::invalid_argument("ChannelErrorModel: shape must be positive");
}

double ChannelErrorModel::frame_error_prob(double distance_m) const {
    if (!(distance_m >= d_min) || !(distance_m <= d_max)) {
        throw std::invalid_argument("ChannelErrorModel: distance " + std::to_string(distance_m) +
                                    " outside [" + std::to_string(d_min) + ", " +
                                    std::to_string(d_max) + "]");
    }
    const double x = (distance_m - d_min) / (d_max - d_min);
    return p_min + (p_max - p_min) * std::pow(x, shape);
}

}  // namespace fedcw::sim
