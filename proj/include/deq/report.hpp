#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deq/types.hpp"

namespace deq {

using Json = nlohmann::ordered_json;

/// One named check: a measured value against its bound.
struct CheckResult {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
    std::string note;
};

struct Report {
    std::string suite;
    std::vector<CheckResult> checks;

    void add(std::string name, double value, double bound, bool pass, std::string note = "") {
        checks.push_back({std::move(name), value, bound, pass, std::move(note)});
    }

    /// pass(value <= bound) convenience.
    void add_le(std::string name, double value, double bound, std::string note = "") {
        const bool ok = value <= bound;
        add(std::move(name), value, bound, ok, std::move(note));
    }

    void add_ge(std::string name, double value, double bound, std::string note = "") {
        const bool ok = value >= bound;
        add(std::move(name), value, bound, ok, std::move(note));
    }

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    Json to_json() const {
        Json arr = Json::array();
        for (const auto& c : checks) {
            Json j{{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}};
            if (!c.note.empty()) j["note"] = c.note;
            arr.push_back(j);
        }
        return Json{{"suite", suite}, {"checks", arr},
                    {"status", all_pass() ? "pass" : "fail"}};
    }
};

inline void write_json(const Json& j, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

}  // namespace deq
