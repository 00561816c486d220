#pragma once

// GridField persistence: <base>.json holds the header (dims, extents, dtype),
// <base>.bin the little-endian float64 samples in row-major order.

#include "hypermix/errors.hpp"
#include "hypermix/lp_grid.hpp"

#include "json.hpp"

#include <bit>
#include <fstream>
#include <string>

namespace hypermix::io {

inline nlohmann::json field_header(const lp::GridField& f) {
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& a : f.axes()) axes.push_back({{"n", a.n}, {"lo", a.lo}, {"h", a.h}});
    return {{"k", f.k()}, {"axes", axes}, {"dtype", "f64le"}, {"layout", "row-major"}};
}

inline void save_field(const lp::GridField& f, const std::string& base) {
    static_assert(std::endian::native == std::endian::little, "field files are little-endian");
    {
        std::ofstream h(base + ".json");
        if (!h) throw InvalidArgument("cannot write " + base + ".json");
        h << field_header(f).dump(2) << '\n';
    }
    std::ofstream b(base + ".bin", std::ios::binary);
    if (!b) throw InvalidArgument("cannot write " + base + ".bin");
    b.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.values().size() * sizeof(double)));
}

inline lp::GridField load_field(const std::string& base) {
    std::ifstream h(base + ".json");
    if (!h) throw InvalidArgument("cannot read " + base + ".json");
    const auto j = nlohmann::json::parse(h);
    if (j.value("dtype", "") != "f64le") throw InvalidArgument("unsupported dtype in " + base + ".json");
    std::vector<lp::Axis> axes;
    for (const auto& a : j.at("axes")) axes.push_back({a.at("n").get<std::size_t>(), a.at("lo").get<double>(), a.at("h").get<double>()});
    if (axes.size() != j.at("k").get<std::size_t>()) throw InvalidArgument("axis count disagrees with k");
    lp::GridField f(std::move(axes));
    std::ifstream b(base + ".bin", std::ios::binary | std::ios::ate);
    if (!b) throw InvalidArgument("cannot read " + base + ".bin");
    const auto bytes = static_cast<std::size_t>(b.tellg());
    if (bytes != f.size() * sizeof(double)) throw GridMismatch("binary size does not match the header");
    b.seekg(0);
    b.read(reinterpret_cast<char*>(f.values().data()), static_cast<std::streamsize>(bytes));
    return f;
}

} // namespace hypermix::io
