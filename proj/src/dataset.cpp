#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "memclust/evaluation.hpp"

namespace memclust {

using nlohmann::json;

namespace {

// LaMP ships some ids as numbers.
std::string id_field(const json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw Error(errc::malformed_dataset, std::string("field '") + key + "' must be a string or integer");
}

std::string string_field(const json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_string()) throw Error(errc::malformed_dataset, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

Example parse_example(const json& j) {
    if (!j.is_object()) throw Error(errc::malformed_dataset, "line is not a JSON object");
    Example ex;
    ex.id = id_field(j, "id");
    ex.instruction = string_field(j, "input");
    ex.reference = string_field(j, "output");
    if (j.contains("profile")) {
        const auto& profile = j.at("profile");
        if (!profile.is_array()) throw Error(errc::malformed_dataset, "'profile' must be an array");
        std::unordered_set<std::string> seen;
        for (const auto& d : profile) {
            Document doc;
            doc.id = id_field(d, "id");
            doc.text = string_field(d, "text");
            if (d.contains("title") && !d.at("title").is_null()) doc.text = string_field(d, "title") + "\n" + doc.text;
            if (!seen.insert(doc.id).second) {
                throw Error(errc::duplicate_id, "profile document id '" + doc.id + "' repeats");
            }
            ex.profile.push_back(std::move(doc));
        }
    }
    ex.validate();
    return ex;
}

}  // namespace

std::vector<Example> parse_dataset(std::istream& in, const std::string& source) {
    std::vector<Example> out;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = source + ":" + std::to_string(line_no) + ": ";
        Example ex;
        try {
            ex = parse_example(json::parse(line));
        } catch (const json::exception& e) {
            throw Error(errc::malformed_dataset, where + e.what());
        } catch (const Error& e) {
            throw Error(e.code(), where + e.what());
        }
        if (!ids.insert(ex.id).second) throw Error(errc::duplicate_id, where + "example id '" + ex.id + "' repeats");
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<Example> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_error, "cannot open dataset '" + path.string() + "'");
    return parse_dataset(in, path.string());
}

}  // namespace memclust
