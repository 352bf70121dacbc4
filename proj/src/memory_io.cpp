#include "memclust/memory_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace memclust {

using nlohmann::json;

namespace {

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::string_view in, std::size_t offset) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<T>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
    }
    return value;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > UINT32_MAX) throw Error(errc::format_error, std::string(what) + " exceeds u32 range");
    return static_cast<std::uint32_t>(v);
}

std::string encode(std::size_t d_m, std::size_t d_e, std::span<const Matrix> blocks, const json& trailer) {
    std::string out;
    out.reserve(kMemoryHeaderSize + blocks.size() * d_m * d_e * 4 + 256);
    out.append("MEMT", 4);
    put_le<std::uint16_t>(out, kMemoryFormatVersion);
    put_le<std::uint32_t>(out, checked_u32(d_m, "D_m"));
    put_le<std::uint32_t>(out, checked_u32(d_e, "D_e"));
    put_le<std::uint32_t>(out, checked_u32(blocks.size(), "count"));
    out.push_back(static_cast<char>(4));
    out.append(5, '\0');
    for (const auto& b : blocks) {
        for (float v : b.values()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
    out += trailer.dump();
    return out;
}

json provenance_to_json(const BlockProvenance& p) {
    json j = {{"row_begin", p.row_begin}, {"row_end", p.row_end}, {"members", p.member_doc_ids}};
    j["cluster"] = p.cluster_id ? json(*p.cluster_id) : json(nullptr);
    return j;
}

}  // namespace

std::string encode_memory_set(std::span<const MemoryTokens> memories) {
    if (memories.empty()) throw Error(errc::empty_memory_set, "nothing to encode");
    require_uniform_shape(memories);
    json blocks = json::object();
    std::vector<Matrix> mats;
    for (std::size_t i = 0; i < memories.size(); ++i) {
        blocks[std::to_string(i)] = memories[i].doc_id();
        mats.push_back(memories[i].tokens());
    }
    return encode(memories.front().d_m(), memories.front().d_e(), mats, json{{"blocks", blocks}});
}

std::string encode_compressed_memory(const CompressedMemory& memory) {
    const auto d_m = memory.block_rows;
    if (d_m == 0 || memory.rows.rows() % d_m != 0) {
        throw Error(errc::shape_mismatch, "compressed rows are not a multiple of the block size");
    }
    const auto count = memory.rows.rows() / d_m;
    const auto d_e = memory.rows.cols();
    std::vector<Matrix> mats;
    json blocks = json::object();
    json prov = json::array();
    for (std::size_t b = 0; b < count; ++b) {
        auto first = memory.rows.values().begin() + static_cast<std::ptrdiff_t>(b * d_m * d_e);
        mats.emplace_back(d_m, d_e, std::vector<float>(first, first + static_cast<std::ptrdiff_t>(d_m * d_e)));
    }
    for (std::size_t b = 0; b < memory.provenance.size(); ++b) {
        const auto& p = memory.provenance[b];
        blocks[std::to_string(b)] = p.member_doc_ids.empty() ? std::string() : p.member_doc_ids.front();
        prov.push_back(provenance_to_json(p));
    }
    json trailer = {{"blocks", blocks},
                    {"strategy", std::string(to_string(memory.strategy))},
                    {"effective_k", memory.effective_k},
                    {"provenance", prov}};
    return encode(d_m, d_e, mats, trailer);
}

MemoryFile decode_memory_file(std::string_view bytes) {
    if (bytes.size() < kMemoryHeaderSize || bytes.substr(0, 4) != "MEMT") {
        throw Error(errc::format_error, "not a memory tensor file");
    }
    const auto version = get_le<std::uint16_t>(bytes, 4);
    if (version != kMemoryFormatVersion) {
        throw Error(errc::format_error, "unsupported version " + std::to_string(version));
    }
    MemoryFile f;
    f.d_m = get_le<std::uint32_t>(bytes, 6);
    f.d_e = get_le<std::uint32_t>(bytes, 10);
    const auto count = get_le<std::uint32_t>(bytes, 14);
    f.float_width = static_cast<std::uint8_t>(bytes[18]);
    if (f.float_width != 4 && f.float_width != 8) throw Error(errc::format_error, "bad float width");

    const std::size_t per_block = static_cast<std::size_t>(f.d_m) * f.d_e;
    const std::size_t payload = static_cast<std::size_t>(count) * per_block * f.float_width;
    if (bytes.size() < kMemoryHeaderSize + payload) throw Error(errc::format_error, "truncated payload");

    std::size_t off = kMemoryHeaderSize;
    for (std::uint32_t b = 0; b < count; ++b) {
        std::vector<float> vals(per_block);
        for (auto& v : vals) {
            if (f.float_width == 4) {
                v = std::bit_cast<float>(get_le<std::uint32_t>(bytes, off));
            } else {
                v = static_cast<float>(std::bit_cast<double>(get_le<std::uint64_t>(bytes, off)));
            }
            off += f.float_width;
        }
        f.blocks.emplace_back(f.d_m, f.d_e, std::move(vals));
    }
    f.trailer_json = std::string(bytes.substr(off));
    json trailer;
    try {
        trailer = json::parse(f.trailer_json);
    } catch (const json::exception& e) {
        throw Error(errc::format_error, std::string("bad trailer: ") + e.what());
    }
    const auto& blocks = trailer.at("blocks");
    f.block_doc_ids.resize(count);
    for (std::uint32_t b = 0; b < count; ++b) {
        auto it = blocks.find(std::to_string(b));
        if (it == blocks.end()) throw Error(errc::format_error, "trailer lacks block " + std::to_string(b));
        f.block_doc_ids[b] = it->get<std::string>();
    }
    return f;
}

std::vector<MemoryTokens> to_memory_tokens(const MemoryFile& file) {
    std::vector<MemoryTokens> out;
    for (std::size_t b = 0; b < file.blocks.size(); ++b) out.emplace_back(file.block_doc_ids[b], file.blocks[b]);
    return out;
}

CompressedMemory to_compressed_memory(const MemoryFile& file) {
    const auto trailer = json::parse(file.trailer_json);
    if (!trailer.contains("strategy")) throw Error(errc::format_error, "file holds a memory set, not a compressed memory");
    CompressedMemory cm;
    cm.strategy = parse_strategy(trailer.at("strategy").get<std::string>());
    cm.effective_k = trailer.value("effective_k", std::size_t{0});
    cm.block_rows = file.d_m;
    cm.rows = file.blocks.empty() ? Matrix(0, file.d_e) : concat_rows(file.blocks);
    for (const auto& p : trailer.at("provenance")) {
        BlockProvenance bp;
        bp.row_begin = p.at("row_begin").get<std::size_t>();
        bp.row_end = p.at("row_end").get<std::size_t>();
        if (!p.at("cluster").is_null()) bp.cluster_id = p.at("cluster").get<std::size_t>();
        bp.member_doc_ids = p.at("members").get<std::vector<std::string>>();
        cm.provenance.push_back(std::move(bp));
    }
    return cm;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(errc::io_error, "cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(errc::io_error, "write to '" + path.string() + "' failed");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::io_error, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string memory_set_to_debug_json(std::span<const MemoryTokens> memories) {
    require_uniform_shape(memories);
    json j;
    j["d_m"] = memories.empty() ? 0 : memories.front().d_m();
    j["d_e"] = memories.empty() ? 0 : memories.front().d_e();
    j["memories"] = json::array();
    for (const auto& m : memories) {
        json rows = json::array();
        for (std::size_t r = 0; r < m.d_m(); ++r) {
            auto row = m.tokens().row(r);
            rows.push_back(std::vector<float>(row.begin(), row.end()));
        }
        j["memories"].push_back({{"doc_id", m.doc_id()}, {"tokens", rows}});
    }
    return j.dump();
}

std::vector<MemoryTokens> memory_set_from_debug_json(std::string_view text) {
    std::vector<MemoryTokens> out;
    try {
        const auto j = json::parse(text);
        for (const auto& m : j.at("memories")) {
            const auto rows = m.at("tokens").get<std::vector<std::vector<float>>>();
            if (rows.empty()) throw Error(errc::shape_mismatch, "memory without rows");
            std::vector<float> flat;
            for (const auto& r : rows) {
                if (r.size() != rows.front().size()) throw Error(errc::shape_mismatch, "ragged token rows");
                flat.insert(flat.end(), r.begin(), r.end());
            }
            out.emplace_back(m.at("doc_id").get<std::string>(),
                             Matrix(rows.size(), rows.front().size(), std::move(flat)));
        }
    } catch (const json::exception& e) {
        throw Error(errc::format_error, e.what());
    }
    require_uniform_shape(out);
    return out;
}

}  // namespace memclust
