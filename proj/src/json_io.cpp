#include "cirdiff/json_io.hpp"

#include "cirdiff/error.hpp"

namespace cirdiff {

namespace {

nlohmann::ordered_json leg_json(const CirParams& p, const char* state) {
    nlohmann::ordered_json j;
    j["k"] = p.k;
    j["sigma"] = p.sigma;
    j["theta"] = p.theta;
    j[state] = p.z0;
    return j;
}

CirParams leg_from(const nlohmann::json& j, const char* leg, const char* state) {
    if (!j.contains(leg) || !j[leg].is_object()) {
        fail(ErrorCode::validation, std::string("model is missing the '") + leg + "' leg");
    }
    const auto& o = j[leg];
    auto num = [&](const char* key) {
        if (!o.contains(key) || !o[key].is_number()) {
            fail(ErrorCode::validation,
                 std::string("model leg '") + leg + "' needs a numeric '" + key + "'");
        }
        return o[key].get<double>();
    };
    CirParams p;
    p.k = num("k");
    p.sigma = num("sigma");
    p.theta = num("theta");
    p.z0 = num(state);
    return p;
}

}  // namespace

nlohmann::ordered_json model_to_json(const DiffModel& m) {
    nlohmann::ordered_json j;
    j["x"] = leg_json(m.x, "x0");
    j["y"] = leg_json(m.y, "y0");
    return j;
}

DiffModel model_from_json(const nlohmann::json& j) {
    DiffModel m;
    m.x = leg_from(j, "x", "x0");
    m.y = leg_from(j, "y", "y0");
    return m;
}

}  // namespace cirdiff
