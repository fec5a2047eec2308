#ifndef OISA_FIXTURE_HPP
#define OISA_FIXTURE_HPP

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "oisa/common.hpp"
#include "oisa/pixel_frontend.hpp"

namespace oisa {

// ---------------------------------------------------------------------------
// Fixture container: manifest.json + raw little-endian tensor blobs
// ---------------------------------------------------------------------------

enum class Dtype { f64, i32, u8 };

inline std::string dtype_name(Dtype d) {
    switch (d) {
    case Dtype::f64: return "f64";
    case Dtype::i32: return "i32";
    case Dtype::u8: return "u8";
    }
    fail(errc::internal, "dtype_name: bad dtype");
}

inline Dtype dtype_from_name(const std::string& s) {
    if (s == "f64") return Dtype::f64;
    if (s == "i32") return Dtype::i32;
    if (s == "u8") return Dtype::u8;
    fail(errc::fixture, "unknown dtype: " + s);
}

inline std::size_t dtype_size(Dtype d) {
    switch (d) {
    case Dtype::f64: return 8;
    case Dtype::i32: return 4;
    case Dtype::u8: return 1;
    }
    fail(errc::internal, "dtype_size: bad dtype");
}

struct Tensor {
    Dtype dtype = Dtype::f64;
    std::vector<std::int64_t> shape;
    std::vector<unsigned char> raw;

    std::size_t elements() const {
        std::size_t n = 1;
        for (auto d : shape) n *= std::size_t(d);
        return n;
    }

    std::vector<double> as_f64() const {
        require(dtype == Dtype::f64, errc::fixture, "tensor is not f64");
        std::vector<double> v(elements());
        std::memcpy(v.data(), raw.data(), raw.size());
        return v;
    }
    std::vector<std::int32_t> as_i32() const {
        require(dtype == Dtype::i32, errc::fixture, "tensor is not i32");
        std::vector<std::int32_t> v(elements());
        std::memcpy(v.data(), raw.data(), raw.size());
        return v;
    }
    std::vector<std::uint8_t> as_u8() const {
        require(dtype == Dtype::u8, errc::fixture, "tensor is not u8");
        return std::vector<std::uint8_t>(raw.begin(), raw.end());
    }

    static Tensor f64(std::vector<std::int64_t> shape, const std::vector<double>& data) {
        Tensor t;
        t.dtype = Dtype::f64;
        t.shape = std::move(shape);
        t.raw.resize(data.size() * 8);
        std::memcpy(t.raw.data(), data.data(), t.raw.size());
        require(t.elements() == data.size(), errc::invalid_argument, "tensor shape mismatch");
        return t;
    }
    static Tensor i32(std::vector<std::int64_t> shape, const std::vector<std::int32_t>& data) {
        Tensor t;
        t.dtype = Dtype::i32;
        t.shape = std::move(shape);
        t.raw.resize(data.size() * 4);
        std::memcpy(t.raw.data(), data.data(), t.raw.size());
        require(t.elements() == data.size(), errc::invalid_argument, "tensor shape mismatch");
        return t;
    }
    static Tensor u8(std::vector<std::int64_t> shape, const std::vector<std::uint8_t>& data) {
        Tensor t;
        t.dtype = Dtype::u8;
        t.shape = std::move(shape);
        t.raw.assign(data.begin(), data.end());
        require(t.elements() == data.size(), errc::invalid_argument, "tensor shape mismatch");
        return t;
    }
};

struct FixtureContainer {
    std::map<std::string, Tensor> tensors;
    nlohmann::json metadata; // free-form extras recorded in the manifest

    const Tensor& get(const std::string& name) const {
        auto it = tensors.find(name);
        require(it != tensors.end(), errc::fixture, "fixture tensor missing: " + name);
        return it->second;
    }
    bool has(const std::string& name) const { return tensors.count(name) > 0; }
};

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
    return buf;
}

inline void save_fixture(const std::filesystem::path& dir, const FixtureContainer& fc) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["format"] = "oisa-fixture";
    manifest["version"] = 1;
    if (!fc.metadata.is_null()) manifest["metadata"] = fc.metadata;
    auto& list = manifest["tensors"] = nlohmann::json::array();
    for (const auto& [name, t] : fc.tensors) {
        std::string file = name + ".bin";
        std::ofstream os(dir / file, std::ios::binary);
        require(os.good(), errc::fixture, "cannot write " + (dir / file).string());
        os.write(reinterpret_cast<const char*>(t.raw.data()), std::streamsize(t.raw.size()));
        require(os.good(), errc::fixture, "short write to " + (dir / file).string());
        nlohmann::json e;
        e["name"] = name;
        e["dtype"] = dtype_name(t.dtype);
        e["shape"] = t.shape;
        e["file"] = file;
        e["fnv1a64"] = hex64(fnv1a64(t.raw.data(), t.raw.size()));
        list.push_back(e);
    }
    std::ofstream ms(dir / "manifest.json");
    ms << manifest.dump(2) << "\n";
    require(ms.good(), errc::fixture, "cannot write manifest");
}

inline FixtureContainer load_fixture(const std::filesystem::path& dir) {
    std::ifstream ms(dir / "manifest.json");
    require(ms.good(), errc::fixture, "cannot open " + (dir / "manifest.json").string());
    nlohmann::json manifest;
    try {
        ms >> manifest;
    } catch (const nlohmann::json::exception& e) {
        fail(errc::fixture, "corrupt manifest in " + dir.string() + ": " + e.what());
    }
    require(manifest.value("format", "") == "oisa-fixture", errc::fixture,
            "not an oisa fixture: " + dir.string());

    FixtureContainer fc;
    if (manifest.contains("metadata")) fc.metadata = manifest["metadata"];
    for (const auto& e : manifest.at("tensors")) {
        Tensor t;
        t.dtype = dtype_from_name(e.at("dtype").get<std::string>());
        t.shape = e.at("shape").get<std::vector<std::int64_t>>();
        std::filesystem::path file = dir / e.at("file").get<std::string>();
        std::ifstream is(file, std::ios::binary);
        require(is.good(), errc::fixture, "cannot open " + file.string());
        t.raw.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
        require(t.raw.size() == t.elements() * dtype_size(t.dtype), errc::fixture,
                "blob size mismatch for " + file.string());
        std::string want = e.at("fnv1a64").get<std::string>();
        std::string got = hex64(fnv1a64(t.raw.data(), t.raw.size()));
        require(want == got, errc::fixture,
                "checksum mismatch for " + file.string() + ": manifest " + want + ", blob " + got);
        fc.tensors[e.at("name").get<std::string>()] = std::move(t);
    }
    return fc;
}

// ---------------------------------------------------------------------------
// 8-bit grayscale PGM (P2/P5); values map linearly to [0,1]
// ---------------------------------------------------------------------------

inline Frame load_pgm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), errc::fixture, "cannot open " + path.string());

    auto next_token = [&]() -> std::string {
        std::string tok;
        while (is) {
            int c = is.get();
            if (c == '#') {
                while (is && is.get() != '\n') {}
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) break;
                continue;
            }
            if (c == EOF) break;
            tok.push_back(char(c));
        }
        return tok;
    };

    std::string magic = next_token();
    require(magic == "P5" || magic == "P2", errc::fixture, "not an 8-bit PGM: " + path.string());
    int w = std::stoi(next_token());
    int h = std::stoi(next_token());
    int maxval = std::stoi(next_token());
    require(w >= 1 && h >= 1 && maxval > 0 && maxval <= 255, errc::fixture,
            "unsupported PGM header in " + path.string());

    Frame f;
    f.width = w;
    f.height = h;
    f.intensities.resize(std::size_t(w) * h);
    if (magic == "P5") {
        std::vector<unsigned char> buf(f.intensities.size());
        is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
        require(std::size_t(is.gcount()) == buf.size(), errc::fixture,
                "truncated PGM: " + path.string());
        for (std::size_t i = 0; i < buf.size(); ++i)
            f.intensities[i] = double(buf[i]) / maxval;
    } else {
        for (double& v : f.intensities) {
            int x = std::stoi(next_token());
            require(x >= 0 && x <= maxval, errc::fixture, "PGM sample out of range");
            v = double(x) / maxval;
        }
    }
    return f;
}

inline void save_pgm(const std::filesystem::path& path, const Frame& f) {
    require(f.valid(), errc::invalid_argument, "save_pgm: invalid frame");
    std::ofstream os(path, std::ios::binary);
    require(os.good(), errc::fixture, "cannot write " + path.string());
    os << "P5\n" << f.width << " " << f.height << "\n255\n";
    for (double v : f.intensities) os.put(char(int(v * 255.0 + 0.5)));
    require(os.good(), errc::fixture, "short write to " + path.string());
}

} // namespace oisa

#endif
