#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "bellbox/box.hpp"

namespace bellbox {

// Box file format: an object with key "blocks" mapping two-letter setting
// strings ("XX".."ZZ") to {"pp","pm","mp","mm"}, and/or key "compact"
// holding the 15 parameters as [diag(3), off_diag(6), marg_a(3),
// marg_b(3)]. When both are present they must agree within agree_tol.

class BoxFormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline nlohmann::json box_to_json(const JointBox& box) {
    nlohmann::json blocks = nlohmann::json::object();
    for (Setting a : kSettings) {
        for (Setting b : kSettings) {
            const Block& blk = box.block(a, b);
            std::string name{setting_char(a), setting_char(b)};
            blocks[name] = {{"pp", blk.pp}, {"pm", blk.pm}, {"mp", blk.mp}, {"mm", blk.mm}};
        }
    }
    const std::array<double, 15> compact = compact_from_box(box).to_array15();
    return {{"blocks", blocks}, {"compact", compact}};
}

inline JointBox box_from_json(const nlohmann::json& j, double agree_tol = 1e-9) {
    if (!j.is_object()) throw BoxFormatError("box document must be a JSON object");
    const bool has_blocks = j.contains("blocks");
    const bool has_compact = j.contains("compact");
    if (!has_blocks && !has_compact)
        throw BoxFormatError("box document needs a \"blocks\" or \"compact\" key");

    JointBox from_blocks;
    if (has_blocks) {
        const auto& blocks = j.at("blocks");
        if (!blocks.is_object()) throw BoxFormatError("\"blocks\" must be an object");
        for (Setting a : kSettings) {
            for (Setting b : kSettings) {
                std::string name{setting_char(a), setting_char(b)};
                if (!blocks.contains(name))
                    throw BoxFormatError("missing block \"" + name + "\"");
                const auto& entry = blocks.at(name);
                Block blk;
                try {
                    blk.pp = entry.at("pp").get<double>();
                    blk.pm = entry.at("pm").get<double>();
                    blk.mp = entry.at("mp").get<double>();
                    blk.mm = entry.at("mm").get<double>();
                } catch (const nlohmann::json::exception& e) {
                    throw BoxFormatError("block \"" + name + "\": " + e.what());
                }
                from_blocks.block(a, b) = blk;
            }
        }
    }

    JointBox from_compact;
    if (has_compact) {
        const auto& arr = j.at("compact");
        if (!arr.is_array() || arr.size() != 15)
            throw BoxFormatError("\"compact\" must be an array of 15 numbers");
        std::array<double, 15> v{};
        for (std::size_t i = 0; i < 15; ++i) {
            if (!arr[i].is_number())
                throw BoxFormatError("\"compact\" must be an array of 15 numbers");
            v[i] = arr[i].get<double>();
        }
        from_compact = expand(CompactState::from_array15(v));
    }

    if (has_blocks && has_compact) {
        for (std::size_t i = 0; i < 9; ++i) {
            const Block& x = from_blocks.block(i);
            const Block& y = from_compact.block(i);
            double dev = std::max(std::max(std::abs(x.pp - y.pp), std::abs(x.pm - y.pm)),
                                  std::max(std::abs(x.mp - y.mp), std::abs(x.mm - y.mm)));
            if (dev > agree_tol)
                throw BoxFormatError("\"blocks\" and \"compact\" disagree by " +
                                     std::to_string(dev));
        }
    }
    return has_blocks ? from_blocks : from_compact;
}

inline JointBox load_box_file(const std::string& path, double agree_tol = 1e-9) {
    std::ifstream in(path);
    if (!in) throw BoxFormatError("cannot open box file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw BoxFormatError(std::string("JSON parse error: ") + e.what());
    }
    return box_from_json(j, agree_tol);
}

inline void save_box_file(const std::string& path, const JointBox& box) {
    std::ofstream out(path);
    if (!out) throw BoxFormatError("cannot open output file: " + path);
    out << box_to_json(box).dump(2) << "\n";
}

}  // namespace bellbox
