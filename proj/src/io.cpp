#include "projseg/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace projseg {

namespace {

// host is assumed little-endian (checked once); payloads are memcpy'd
bool host_is_little_endian() {
    const std::uint16_t probe = 1;
    std::uint8_t first;
    std::memcpy(&first, &probe, 1);
    return first == 1;
}

void ensure_le() {
    static const bool ok = host_is_little_endian();
    check(ok, "big-endian hosts are not supported by the binary formats");
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    check(out.good(), "cannot open '", path.string(), "' for writing");
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "cannot open '", path.string(), "' for reading");
    return in;
}

// write-temp-then-rename so readers never observe partial files
class AtomicWriter {
public:
    explicit AtomicWriter(const fs::path& path) : final_(path), tmp_(path.string() + ".tmp"), out_(open_out(tmp_)) {}
    std::ofstream& stream() { return out_; }
    void commit() {
        out_.flush();
        check(out_.good(), "write to '", tmp_.string(), "' failed");
        out_.close();
        fs::rename(tmp_, final_);
    }

private:
    fs::path final_, tmp_;
    std::ofstream out_;
};

std::string read_line(std::ifstream& in, const fs::path& path) {
    std::string line;
    check(static_cast<bool>(std::getline(in, line)), "unexpected end of file in '", path.string(), "'");
    return line;
}

}  // namespace

// -------------------------------------------------------------------- vvol

void write_vvol(const fs::path& path, const Volume3D& volume) {
    ensure_le();
    AtomicWriter w(path);
    std::ofstream& out = w.stream();
    out << "VVOL1\n"
        << volume.L << " " << volume.W << " " << volume.H << " "
        << (volume.dtype == VoxelType::U8 ? "u8" : "f64") << "\n";
    if (volume.dtype == VoxelType::U8) {
        std::vector<std::uint8_t> bytes(volume.data.size());
        for (std::size_t i = 0; i < volume.data.size(); ++i) {
            const double v = volume.data[i];
            check(v >= 0.0 && v <= 255.0 && v == std::floor(v), "u8 volume value ", v,
                  " is not an integer in [0,255]");
            bytes[i] = static_cast<std::uint8_t>(v);
        }
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    } else {
        out.write(reinterpret_cast<const char*>(volume.data.data()),
                  static_cast<std::streamsize>(volume.data.size() * sizeof(double)));
    }
    w.commit();
}

Volume3D read_vvol(const fs::path& path) {
    ensure_le();
    std::ifstream in = open_in(path);
    check(read_line(in, path) == "VVOL1", "'", path.string(), "' is not a VVOL1 file");
    std::istringstream hdr(read_line(in, path));
    int L = 0, W = 0, H = 0;
    std::string dtype;
    check(static_cast<bool>(hdr >> L >> W >> H >> dtype), "malformed vvol header in '", path.string(), "'");
    check(dtype == "u8" || dtype == "f64", "unknown vvol dtype '", dtype, "' in '", path.string(), "'");

    Volume3D v(L, W, H, dtype == "u8" ? VoxelType::U8 : VoxelType::F64);
    const std::size_t n = v.data.size();
    if (v.dtype == VoxelType::U8) {
        std::vector<std::uint8_t> bytes(n);
        in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
        check(in.gcount() == static_cast<std::streamsize>(n), "truncated vvol payload in '", path.string(), "'");
        for (std::size_t i = 0; i < n; ++i) v.data[i] = bytes[i];
    } else {
        in.read(reinterpret_cast<char*>(v.data.data()), static_cast<std::streamsize>(n * sizeof(double)));
        check(in.gcount() == static_cast<std::streamsize>(n * sizeof(double)), "truncated vvol payload in '",
              path.string(), "'");
    }
    return v;
}

// ------------------------------------------------------------------- vsurf

void write_vsurf(const fs::path& path, const LayerSurfaces& surfaces) {
    ensure_le();
    AtomicWriter w(path);
    std::ofstream& out = w.stream();
    out << "VSURF1\n" << surfaces.L << " " << surfaces.W << " 3\n";
    auto write_plane = [&](const std::vector<int>& plane) {
        std::vector<std::int32_t> buf(plane.begin(), plane.end());
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(std::int32_t)));
    };
    write_plane(surfaces.ilm);
    write_plane(surfaces.opl);
    write_plane(surfaces.bm);
    w.commit();
}

LayerSurfaces read_vsurf(const fs::path& path) {
    ensure_le();
    std::ifstream in = open_in(path);
    check(read_line(in, path) == "VSURF1", "'", path.string(), "' is not a VSURF1 file");
    std::istringstream hdr(read_line(in, path));
    int L = 0, W = 0, planes = 0;
    check(static_cast<bool>(hdr >> L >> W >> planes) && planes == 3, "malformed vsurf header in '",
          path.string(), "'");

    LayerSurfaces s(L, W);
    auto read_plane = [&](std::vector<int>& plane) {
        std::vector<std::int32_t> buf(plane.size());
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(std::int32_t)));
        check(in.gcount() == static_cast<std::streamsize>(buf.size() * sizeof(std::int32_t)),
              "truncated vsurf payload in '", path.string(), "'");
        plane.assign(buf.begin(), buf.end());
    };
    read_plane(s.ilm);
    read_plane(s.opl);
    read_plane(s.bm);
    return s;
}

// --------------------------------------------------------------------- pgm

void write_pgm(const fs::path& path, const std::vector<std::uint8_t>& bytes, int width, int height) {
    check(static_cast<std::size_t>(width) * height == bytes.size(), "pgm payload size ", bytes.size(),
          " != ", width, "x", height);
    AtomicWriter w(path);
    std::ofstream& out = w.stream();
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    w.commit();
}

std::vector<std::uint8_t> read_pgm(const fs::path& path, int& width, int& height) {
    std::ifstream in = open_in(path);
    check(read_line(in, path) == "P5", "'", path.string(), "' is not a binary PGM file");
    // skip comment lines between header tokens
    std::string line = read_line(in, path);
    while (!line.empty() && line[0] == '#') line = read_line(in, path);
    std::istringstream dims(line);
    check(static_cast<bool>(dims >> width >> height), "malformed PGM dimensions in '", path.string(), "'");
    line = read_line(in, path);
    while (!line.empty() && line[0] == '#') line = read_line(in, path);
    check(line == "255", "PGM maxval must be 255 in '", path.string(), "'");

    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    check(in.gcount() == static_cast<std::streamsize>(bytes.size()), "truncated PGM payload in '",
          path.string(), "'");
    return bytes;
}

void write_mask_pgm(const fs::path& path, const Map2D& mask) {
    std::vector<std::uint8_t> bytes(mask.v.size());
    for (std::size_t i = 0; i < mask.v.size(); ++i) {
        check(mask.v[i] == 0.0 || mask.v[i] == 1.0, "mask not binary: value ", mask.v[i], " at index ", i);
        bytes[i] = mask.v[i] == 1.0 ? 255 : 0;
    }
    // PGM is width x height; our rows run along L
    write_pgm(path, bytes, mask.W, mask.L);
}

Map2D read_mask_pgm(const fs::path& path) {
    int width = 0, height = 0;
    const std::vector<std::uint8_t> bytes = read_pgm(path, width, height);
    Map2D mask(height, width, MapKind::Label);
    for (std::size_t i = 0; i < bytes.size(); ++i) mask.v[i] = bytes[i] != 0 ? 1.0 : 0.0;
    return mask;
}

void write_scaled_pgm(const fs::path& path, const Map2D& map) {
    double lo = map.v.empty() ? 0.0 : map.v[0], hi = lo;
    for (double v : map.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<std::uint8_t> bytes(map.v.size(), 0);
    if (hi > lo) {
        const double scale = 255.0 / (hi - lo);
        for (std::size_t i = 0; i < map.v.size(); ++i)
            bytes[i] = static_cast<std::uint8_t>(std::lround((map.v[i] - lo) * scale));
    }
    write_pgm(path, bytes, map.W, map.L);
}

// -------------------------------------------------------------------- vmap

void write_vmap(const fs::path& path, const Map2D& map) {
    ensure_le();
    AtomicWriter w(path);
    std::ofstream& out = w.stream();
    out << "VMAP1\n" << map.L << " " << map.W << "\n";
    out.write(reinterpret_cast<const char*>(map.v.data()),
              static_cast<std::streamsize>(map.v.size() * sizeof(double)));
    w.commit();
}

Map2D read_vmap(const fs::path& path) {
    ensure_le();
    std::ifstream in = open_in(path);
    check(read_line(in, path) == "VMAP1", "'", path.string(), "' is not a VMAP1 file");
    std::istringstream hdr(read_line(in, path));
    int L = 0, W = 0;
    check(static_cast<bool>(hdr >> L >> W), "malformed vmap header in '", path.string(), "'");
    Map2D map(L, W);
    in.read(reinterpret_cast<char*>(map.v.data()), static_cast<std::streamsize>(map.v.size() * sizeof(double)));
    check(in.gcount() == static_cast<std::streamsize>(map.v.size() * sizeof(double)),
          "truncated vmap payload in '", path.string(), "'");
    return map;
}

// -------------------------------------------------------------- checkpoint

void save_checkpoint(const fs::path& path, const ModelParams& params) {
    ensure_le();
    AtomicWriter w(path);
    std::ofstream& out = w.stream();
    out << "PSEG1\n" << params.count() << "\n";
    for (std::size_t i = 0; i < params.count(); ++i) {
        const NamedParam& np = params.item(i);
        out << np.name << " " << np.param->value.rank();
        for (int a = 0; a < np.param->value.rank(); ++a) out << " " << np.param->value.dim(a);
        out << "\n";
    }
    for (std::size_t i = 0; i < params.count(); ++i) {
        const Tensor& t = params.item(i).param->value;
        out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    w.commit();
}

void load_checkpoint(const fs::path& path, const ModelParams& params) {
    ensure_le();
    std::ifstream in = open_in(path);
    check(read_line(in, path) == "PSEG1", "'", path.string(), "' is not a PSEG1 checkpoint");
    std::size_t count = 0;
    {
        std::istringstream hdr(read_line(in, path));
        check(static_cast<bool>(hdr >> count), "malformed checkpoint count in '", path.string(), "'");
    }
    check(count == params.count(), "checkpoint '", path.string(), "' holds ", count, " parameters, model has ",
          params.count());
    for (std::size_t i = 0; i < count; ++i) {
        std::istringstream ls(read_line(in, path));
        std::string name;
        int rank = 0;
        check(static_cast<bool>(ls >> name >> rank), "malformed checkpoint manifest line ", i, " in '",
              path.string(), "'");
        Shape shape(static_cast<std::size_t>(rank));
        for (int a = 0; a < rank; ++a) check(static_cast<bool>(ls >> shape[static_cast<std::size_t>(a)]),
                                             "malformed shape in checkpoint manifest line ", i);
        const NamedParam& np = params.item(i);
        check(np.name == name, "checkpoint entry ", i, " is '", name, "', model expects '", np.name, "'");
        check(np.param->value.shape() == shape, "checkpoint entry '", name, "' has shape ", shape_str(shape),
              ", model expects ", shape_str(np.param->value.shape()));
    }
    for (std::size_t i = 0; i < count; ++i) {
        Tensor& t = params.item(i).param->value;
        in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
        check(in.gcount() == static_cast<std::streamsize>(t.size() * sizeof(double)),
              "truncated checkpoint payload in '", path.string(), "'");
    }
}

std::vector<std::string> read_checkpoint_names(const fs::path& path) {
    std::ifstream in = open_in(path);
    check(read_line(in, path) == "PSEG1", "'", path.string(), "' is not a PSEG1 checkpoint");
    std::size_t count = 0;
    {
        std::istringstream hdr(read_line(in, path));
        check(static_cast<bool>(hdr >> count), "malformed checkpoint count in '", path.string(), "'");
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < count; ++i) {
        std::istringstream ls(read_line(in, path));
        std::string name;
        check(static_cast<bool>(ls >> name), "malformed checkpoint manifest line ", i);
        names.push_back(name);
    }
    return names;
}

// ---------------------------------------------------------------- manifest

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
    AtomicWriter w(path);
    for (const ManifestEntry& e : entries) w.stream() << e.id << "\t" << e.split << "\n";
    w.commit();
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
    std::ifstream in = open_in(path);
    std::vector<ManifestEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        check(tab != std::string::npos, "malformed manifest line '", line, "' in '", path.string(), "'");
        ManifestEntry e{line.substr(0, tab), line.substr(tab + 1)};
        check(e.split == "train" || e.split == "val" || e.split == "test", "unknown split '", e.split,
              "' in manifest '", path.string(), "'");
        entries.push_back(std::move(e));
    }
    return entries;
}

// ---------------------------------------------------------------- text io

std::string read_text_file(const fs::path& path) {
    std::ifstream in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
    AtomicWriter w(path);
    w.stream() << content;
    w.commit();
}

}  // namespace projseg
