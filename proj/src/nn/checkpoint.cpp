#include "egostereo/nn/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "egostereo/errors.hpp"

namespace egostereo::nn {

namespace {

constexpr char kMagic[8] = {'E', 'G', 'O', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

std::uint64_t get_u64(std::istream& is) {
  char buf[8];
  is.read(buf, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i]))
         << (8 * i);
  }
  return v;
}

}  // namespace

const CheckpointSection& Checkpoint::at(const std::string& tag) const {
  auto it = sections.find(tag);
  if (it == sections.end()) {
    throw DataError("checkpoint: missing section '" + tag + "'");
  }
  return it->second;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["seed"] = ckpt.seed;
  std::uint64_t offset = 0;
  auto& sections = header["sections"] = nlohmann::json::object();
  for (const auto& [tag, sec] : ckpt.sections) {
    nlohmann::json js;
    js["config"] = sec.config;
    auto& tensors = js["tensors"] = nlohmann::json::array();
    for (const auto& [name, t] : sec.tensors) {
      tensors.push_back({{"name", name},
                         {"shape", t.shape},
                         {"offset", offset},
                         {"count", t.size()}});
      offset += static_cast<std::uint64_t>(t.size());
    }
    sections[tag] = std::move(js);
  }
  const std::string htext = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("checkpoint: cannot write " + tmp);
    os.write(kMagic, 8);
    put_u64(os, htext.size());
    os.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (const auto& [tag, sec] : ckpt.sections) {
      for (const auto& [name, t] : sec.tensors) {
        os.write(reinterpret_cast<const char*>(t.ptr()),
                 static_cast<std::streamsize>(t.size() * sizeof(float)));
      }
    }
    if (!os) throw DataError("checkpoint: short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw DataError("checkpoint: rename to " + path + " failed: " +
                    ec.message());
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) {
    throw DataError("checkpoint: bad magic in " + path);
  }
  const std::uint64_t hlen = get_u64(is);
  std::string htext(hlen, '\0');
  is.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!is) throw DataError("checkpoint: truncated header in " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(htext);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: corrupt header: ") + e.what());
  }

  Checkpoint out;
  try {
    out.seed = header.at("seed").get<std::uint64_t>();
    const std::streampos payload_base = is.tellg();
    for (auto& [tag, js] : header.at("sections").items()) {
      CheckpointSection sec;
      sec.config = js.at("config");
      for (const auto& tj : js.at("tensors")) {
        const std::string name = tj.at("name").get<std::string>();
        Tensor<float> t(tj.at("shape").get<std::vector<int>>());
        const std::uint64_t off = tj.at("offset").get<std::uint64_t>();
        const std::int64_t count = tj.at("count").get<std::int64_t>();
        if (count != t.size()) {
          throw DataError("checkpoint: shape/count mismatch for " + name);
        }
        is.seekg(payload_base + static_cast<std::streamoff>(off * sizeof(float)));
        is.read(reinterpret_cast<char*>(t.ptr()),
                static_cast<std::streamsize>(count * sizeof(float)));
        if (!is) throw DataError("checkpoint: truncated payload at " + name);
        sec.tensors.emplace(name, std::move(t));
      }
      out.sections.emplace(tag, std::move(sec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: malformed header field: ") +
                    e.what());
  }
  return out;
}

CheckpointSection section_from_params(const ParamStore<float>& ps,
                                      nlohmann::json config) {
  CheckpointSection sec;
  sec.config = std::move(config);
  for (const auto& [name, e] : ps.entries()) {
    sec.tensors.emplace(name, e.value);
  }
  return sec;
}

void params_from_section(const CheckpointSection& sec, ParamStore<float>& ps) {
  for (auto& [name, e] : ps.entries()) {
    auto it = sec.tensors.find(name);
    if (it == sec.tensors.end()) {
      throw DataError("checkpoint: section lacks parameter " + name);
    }
    if (it->second.shape != e.value.shape) {
      throw DataError("checkpoint: shape mismatch for " + name + ": file " +
                      it->second.shape_str() + " vs model " +
                      e.value.shape_str());
    }
    e.value = it->second;
  }
  for (const auto& [name, t] : sec.tensors) {
    if (!ps.contains(name)) {
      throw DataError("checkpoint: unexpected parameter " + name);
    }
  }
}

}  // namespace egostereo::nn
