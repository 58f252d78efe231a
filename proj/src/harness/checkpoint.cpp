#include "fedcw/harness/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace fedcw::harness {

namespace {

constexpr char kMagic[4] = {'F', 'C', 'W', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
    if (pos + 8 > in.size()) throw std::runtime_error("checkpoint: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 8;
    return v;
}

void put_doubles(std::string& out, const std::vector<double>& v) {
    for (double d : v) put_u64(out, std::bit_cast<std::uint64_t>(d));
}

std::vector<double> get_doubles(const std::string& in, std::size_t& pos, std::uint64_t count) {
    std::vector<double> v;
    v.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) v.push_back(std::bit_cast<double>(get_u64(in, pos)));
    return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const rl::WeightSnapshot& snap) {
    std::string out;
    out.append(kMagic, 4);
    put_u64(out, snap.layout_id);
    put_u64(out, snap.actor_flat.size());
    put_u64(out, snap.critic_flat.size());
    put_doubles(out, snap.actor_flat);
    put_doubles(out, snap.critic_flat);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("checkpoint: short write to '" + path + "'");
}

rl::WeightSnapshot read_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in '" + path + "'");

    std::size_t pos = 4;
    rl::WeightSnapshot snap;
    snap.layout_id = get_u64(in, pos);
    const auto actor_len = get_u64(in, pos);
    const auto critic_len = get_u64(in, pos);
    snap.actor_flat = get_doubles(in, pos, actor_len);
    snap.critic_flat = get_doubles(in, pos, critic_len);
    if (pos != in.size()) throw std::runtime_error("checkpoint: trailing bytes in '" + path + "'");
    return snap;
}

}  // namespace fedcw::harness
