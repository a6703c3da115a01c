#ifndef PARALAB_GRID_IO_HPP
#define PARALAB_GRID_IO_HPP

// GridField on disk: <stem>.bin holds little-endian float64 (re, im) pairs in
// grid order, <stem>.json holds the header.

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "paralab/torus.hpp"

namespace paralab {

namespace detail {
inline std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
}

inline void write_le_double(std::ostream& os, double x) {
    const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(x));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    os.write(buf, 8);
}

inline double read_le_double(std::istream& is) {
    char buf[8];
    is.read(buf, 8);
    if (!is) throw std::runtime_error("grid binary truncated");
    std::uint64_t bits = 0;
    std::memcpy(&bits, buf, 8);
    return std::bit_cast<double>(to_le(bits));
}
}  // namespace detail

inline nlohmann::json grid_header(const GridField& g) {
    nlohmann::json h;
    h["format"] = "paralab-grid";
    h["version"] = 1;
    h["dtype"] = "complex128-le";
    h["shape"] = g.resolution;
    h["resolution"] = g.resolution;
    h["box"] = {{"d", g.box.dimension()}, {"radii", g.box.radii()}};
    h["coefficient_l2_sq"] = g.coefficient_l2_sq;
    h["aliasing_free_for"] = g.aliasing_free_for ? nlohmann::json(*g.aliasing_free_for) : nlohmann::json(nullptr);
    const LpNorm l2 = lp_norm(g, 2.0);
    h["norms"] = {{"l2", l2.value}, {"l2_exact", l2.exact}};
    return h;
}

inline void write_grid(const GridField& g, const std::filesystem::path& stem) {
    {
        std::ofstream bin(stem.string() + ".bin", std::ios::binary);
        if (!bin) throw std::runtime_error("cannot open " + stem.string() + ".bin");
        for (const auto& s : g.samples) {
            detail::write_le_double(bin, s.real());
            detail::write_le_double(bin, s.imag());
        }
    }
    std::ofstream js(stem.string() + ".json");
    if (!js) throw std::runtime_error("cannot open " + stem.string() + ".json");
    js << grid_header(g).dump(2) << '\n';
}

inline GridField read_grid(const std::filesystem::path& stem) {
    std::ifstream js(stem.string() + ".json");
    if (!js) throw std::runtime_error("cannot open " + stem.string() + ".json");
    const auto h = nlohmann::json::parse(js);
    if (h.at("format") != "paralab-grid") throw std::runtime_error("not a paralab grid header");
    LatticeBox box(h.at("box").at("d").get<int>(), h.at("box").at("radii").get<std::vector<int>>());
    GridField g{box, h.at("resolution").get<std::vector<int>>(), {}, std::nullopt,
                h.at("coefficient_l2_sq").get<double>()};
    if (!h.at("aliasing_free_for").is_null()) g.aliasing_free_for = h.at("aliasing_free_for").get<int>();
    std::size_t total = 1;
    for (int r : g.resolution) total *= static_cast<std::size_t>(r);
    std::ifstream bin(stem.string() + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + stem.string() + ".bin");
    g.samples.resize(total);
    for (auto& s : g.samples) {
        const double re = detail::read_le_double(bin);
        const double im = detail::read_le_double(bin);
        s = {re, im};
    }
    return g;
}

}  // namespace paralab

#endif  // PARALAB_GRID_IO_HPP
