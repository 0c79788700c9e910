#include "fairrm/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fairrm {

Instance instance_from_json(const Json& j, bool validate) {
    Instance inst;
    inst.n = j.at("n").get<int>();
    inst.L = j.at("L").get<int>();
    inst.A = j.at("A").get<Matrix>();
    inst.r = j.at("r").get<Vec>();

    Vec lambda = j.at("lambda").get<Vec>();
    if (static_cast<int>(lambda.size()) == inst.n) {
        double sum = 0.0;
        for (double l : lambda) sum += l;
        if (sum > 1.0 + 1e-9)
            throw std::invalid_argument("instance: per-type rates sum above 1");
        Vec full(static_cast<std::size_t>(inst.n) + 1);
        full[0] = std::max(0.0, 1.0 - sum);
        for (int i = 0; i < inst.n; ++i) full[static_cast<std::size_t>(i) + 1] = lambda[static_cast<std::size_t>(i)];
        inst.lambda = std::move(full);
    } else if (static_cast<int>(lambda.size()) == inst.n + 1) {
        inst.lambda = std::move(lambda);
    } else {
        throw std::invalid_argument("instance: lambda must have n or n+1 entries");
    }

    if (j.contains("m")) {
        inst.m = j.at("m").get<Vec>();
        if (j.contains("q")) inst.q = j.at("q").get<Vec>();
        if (j.contains("m_scale")) inst.m_scale = j.at("m_scale").get<double>();
    } else if (j.contains("q") && j.contains("m_scale")) {
        inst.q = j.at("q").get<Vec>();
        inst.m_scale = j.at("m_scale").get<double>();
        inst.m.resize(inst.q.size());
        for (std::size_t k = 0; k < inst.q.size(); ++k) inst.m[k] = inst.q[k] * inst.m_scale;
    } else {
        throw std::invalid_argument("instance: need m, or q with m_scale");
    }

    if (j.contains("T")) {
        inst.T = j.at("T").get<int>();
    } else if (j.contains("horizon_ratio")) {
        if (!(inst.m_scale > 0.0))
            throw std::invalid_argument("instance: horizon_ratio needs m_scale");
        inst.T = static_cast<int>(std::llround(j.at("horizon_ratio").get<double>() * inst.m_scale));
    } else {
        throw std::invalid_argument("instance: need T or horizon_ratio");
    }

    if (validate) {
        const ValidationReport rep = validate_instance(inst);
        if (!rep.ok) {
            std::string msg = "invalid instance:";
            for (const auto& v : rep.violations) msg += " " + v + ";";
            throw std::invalid_argument(msg);
        }
    }
    return inst;
}

Json instance_to_json(const Instance& inst) {
    Json j;
    j["n"] = inst.n;
    j["L"] = inst.L;
    j["A"] = inst.A;
    j["r"] = inst.r;
    j["lambda"] = inst.lambda;
    j["m"] = inst.m;
    j["T"] = inst.T;
    if (!inst.q.empty()) {
        j["q"] = inst.q;
        j["m_scale"] = inst.m_scale;
    }
    return j;
}

Instance load_instance_file(const std::string& path) {
    return instance_from_json(Json::parse(read_file(path)));
}

PricingInstance pricing_instance_from_json(const Json& j) {
    PricingInstance pinst;
    pinst.base = instance_from_json(j);
    pinst.posted = j.at("p").get<Vec>();
    const Json& tables = j.at("purchase_prob");
    if (static_cast<int>(tables.size()) != pinst.base.n)
        throw std::invalid_argument("pricing instance: need one purchase table per type");
    for (const Json& tj : tables) {
        const Vec prices = tj.at("prices").get<Vec>();
        const Vec probs = tj.at("probs").get<Vec>();
        if (prices.size() != probs.size())
            throw std::invalid_argument("pricing instance: prices/probs length mismatch");
        std::map<double, double> table;
        for (std::size_t k = 0; k < prices.size(); ++k) table[prices[k]] = probs[k];
        pinst.purchase_table.push_back(std::move(table));
    }
    const ValidationReport rep = validate_pricing_instance(pinst);
    if (!rep.ok) {
        std::string msg = "invalid pricing instance:";
        for (const auto& v : rep.violations) msg += " " + v + ";";
        throw std::invalid_argument(msg);
    }
    return pinst;
}

Json pricing_instance_to_json(const PricingInstance& pinst) {
    Json j = instance_to_json(pinst.base);
    j["p"] = pinst.posted;
    Json tables = Json::array();
    for (const auto& table : pinst.purchase_table) {
        Json tj;
        Vec prices, probs;
        for (const auto& [price, prob] : table) {
            prices.push_back(price);
            probs.push_back(prob);
        }
        tj["prices"] = prices;
        tj["probs"] = probs;
        tables.push_back(std::move(tj));
    }
    j["purchase_prob"] = std::move(tables);
    return j;
}

PricingInstance load_pricing_instance_file(const std::string& path) {
    return pricing_instance_from_json(Json::parse(read_file(path)));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace fairrm
