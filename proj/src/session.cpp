#include "lded/session.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <cctype>
#include <json.hpp>
#include <sstream>

#include "lded/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lded::session {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian host");

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class T>
T get_le(const std::string& buf, std::size_t& off, const std::string& stream) {
    if (off + sizeof(T) > buf.size()) throw DataError(stream, off, "truncated binary data");
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

template <class T>
void put_le(std::string& buf, T v) {
    char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf.append(tmp, sizeof(T));
}

void write_file(const fs::path& p, const std::string& data) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed: " + p.string());
}

double field_real(const std::string& s, const std::string& stream, std::size_t row) {
    try {
        const double v = parse_real(s);
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        return v;
    } catch (const std::invalid_argument&) {
        throw DataError(stream, row, "bad numeric field '" + s + "'");
    }
}

int field_int(const std::string& s, const std::string& stream, std::size_t row) {
    const double v = field_real(s, stream, row);
    if (v != std::floor(v)) throw DataError(stream, row, "expected integer, got '" + s + "'");
    return static_cast<int>(v);
}

void check_timestamp(double t, double prev, std::size_t i, const std::string& stream) {
    if (!std::isfinite(t) || t < 0.0) throw DataError(stream, i, "timestamp must be finite and >= 0");
    if (i > 0 && !(t > prev)) throw DataError(stream, i, "timestamps not strictly increasing");
}

json box_json(const BoundingBox& b) {
    return {{"min", {b.min.x, b.min.y, b.min.z}}, {"max", {b.max.x, b.max.y, b.max.z}}};
}

}  // namespace

std::string ValidationReport::to_string() const {
    std::string out;
    for (const auto& v : violations) out += v.stream + ": " + v.kind + ": " + v.message + "\n";
    return out;
}

// ---- manifest -------------------------------------------------------------

Manifest read_manifest(const fs::path& path) {
    json j;
    try {
        j = json::parse(slurp(path));
    } catch (const json::parse_error& e) {
        throw DataError("manifest", 0, e.what());
    }
    Manifest m;
    try {
        const auto& r = j.at("rates");
        m.rates.audio_hz = r.at("audio_hz").get<double>();
        m.rates.meltpool_hz = r.at("meltpool_hz").get<double>();
        m.rates.thermal_hz = r.at("thermal_hz").get<double>();
        m.rates.robot_hz = r.at("robot_hz").get<double>();
        m.image_width = j.at("meltpool_image").at("width").get<int>();
        m.image_height = j.at("meltpool_image").at("height").get<int>();
        m.thermal_width = j.at("thermal_image").at("width").get<int>();
        m.thermal_height = j.at("thermal_image").at("height").get<int>();
        const auto& lo = j.at("build_box_mm").at("min");
        const auto& hi = j.at("build_box_mm").at("max");
        m.build_box = {{lo.at(0), lo.at(1), lo.at(2)}, {hi.at(0), hi.at(1), hi.at(2)}};
        m.layer_height_mm = j.at("layer_height_mm").get<double>();
        m.emissivity_melt = j.at("emissivity").at("melt_pool").get<double>();
        m.emissivity_haz = j.at("emissivity").at("haz").get<double>();
        m.melt_threshold_k = j.at("thermal_thresholds_k").at("melt").get<double>();
        m.haz_threshold_k = j.at("thermal_thresholds_k").at("haz").get<double>();
    } catch (const json::exception& e) {
        throw DataError("manifest", 0, e.what());
    }
    return m;
}

void write_manifest(const Manifest& m, const fs::path& path) {
    json j = {
        {"rates",
         {{"audio_hz", m.rates.audio_hz},
          {"meltpool_hz", m.rates.meltpool_hz},
          {"thermal_hz", m.rates.thermal_hz},
          {"robot_hz", m.rates.robot_hz}}},
        {"meltpool_image", {{"width", m.image_width}, {"height", m.image_height}}},
        {"thermal_image", {{"width", m.thermal_width}, {"height", m.thermal_height}}},
        {"build_box_mm", box_json(m.build_box)},
        {"layer_height_mm", m.layer_height_mm},
        {"emissivity", {{"melt_pool", m.emissivity_melt}, {"haz", m.emissivity_haz}}},
        {"thermal_thresholds_k", {{"melt", m.melt_threshold_k}, {"haz", m.haz_threshold_k}}},
    };
    write_file(path, j.dump(2) + "\n");
}

// ---- audio ------------------------------------------------------------------

AudioSignal read_wav(const fs::path& path) {
    const std::string buf = slurp(path);
    const std::string stream = "audio";
    if (buf.size() < 12 || buf.compare(0, 4, "RIFF") != 0 || buf.compare(8, 4, "WAVE") != 0) {
        throw DataError(stream, 0, "not a RIFF/WAVE file");
    }
    std::size_t off = 12;
    bool have_fmt = false;
    std::uint32_t rate = 0;
    AudioSignal a;
    while (off + 8 <= buf.size()) {
        const std::string id = buf.substr(off, 4);
        off += 4;
        const auto len = get_le<std::uint32_t>(buf, off, stream);
        if (off + len > buf.size()) throw DataError(stream, off, "chunk '" + id + "' truncated");
        if (id == "fmt ") {
            std::size_t p = off;
            const auto format = get_le<std::uint16_t>(buf, p, stream);
            const auto channels = get_le<std::uint16_t>(buf, p, stream);
            rate = get_le<std::uint32_t>(buf, p, stream);
            p += 6;  // byte rate, block align
            const auto bits = get_le<std::uint16_t>(buf, p, stream);
            if (format != 1 || channels != 1 || bits != 16) {
                throw DataError(stream, 0, "only PCM 16-bit mono is supported");
            }
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw DataError(stream, 0, "data chunk before fmt chunk");
            const std::size_t n = len / 2;
            a.samples.resize(n);
            std::size_t p = off;
            for (std::size_t i = 0; i < n; ++i) {
                a.samples[i] = get_le<std::int16_t>(buf, p, stream) / 32768.0;
            }
        }
        off += len + (len & 1u);
    }
    if (!have_fmt) throw DataError(stream, 0, "missing fmt chunk");
    a.rate = rate;
    return a;
}

void write_wav(const AudioSignal& a, const fs::path& path) {
    std::string buf;
    const auto data_len = static_cast<std::uint32_t>(a.samples.size() * 2);
    const auto rate = static_cast<std::uint32_t>(std::lround(a.rate));
    buf += "RIFF";
    put_le<std::uint32_t>(buf, 36 + data_len);
    buf += "WAVEfmt ";
    put_le<std::uint32_t>(buf, 16);
    put_le<std::uint16_t>(buf, 1);
    put_le<std::uint16_t>(buf, 1);
    put_le<std::uint32_t>(buf, rate);
    put_le<std::uint32_t>(buf, rate * 2);
    put_le<std::uint16_t>(buf, 2);
    put_le<std::uint16_t>(buf, 16);
    buf += "data";
    put_le<std::uint32_t>(buf, data_len);
    buf.reserve(buf.size() + data_len);
    for (double s : a.samples) {
        const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
        put_le<std::int16_t>(buf, static_cast<std::int16_t>(q));
    }
    write_file(path, buf);
}

// ---- PGM --------------------------------------------------------------------

GrayImage read_pgm(const fs::path& path) {
    const std::string buf = slurp(path);
    const std::string stream = "meltpool:" + path.filename().string();
    std::size_t off = 0;
    auto token = [&]() {
        while (off < buf.size()) {
            if (buf[off] == '#') {
                while (off < buf.size() && buf[off] != '\n') ++off;
            } else if (std::isspace(static_cast<unsigned char>(buf[off]))) {
                ++off;
            } else {
                break;
            }
        }
        std::string t;
        while (off < buf.size() && !std::isspace(static_cast<unsigned char>(buf[off]))) t += buf[off++];
        return t;
    };
    if (token() != "P5") throw DataError(stream, 0, "not a binary PGM (P5)");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(token());
        h = std::stoi(token());
        maxval = std::stoi(token());
    } catch (const std::exception&) {
        throw DataError(stream, 0, "malformed PGM header");
    }
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255) throw DataError(stream, 0, "unsupported PGM header");
    ++off;  // single whitespace after maxval
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (off + n > buf.size()) throw DataError(stream, 0, "truncated PGM raster");
    GrayImage img(w, h);
    std::memcpy(img.data().data(), buf.data() + off, n);
    return img;
}

void write_pgm(const GrayImage& img, const fs::path& path) {
    std::string buf = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    buf.append(reinterpret_cast<const char*>(img.data().data()), img.size());
    write_file(path, buf);
}

// ---- thermal ----------------------------------------------------------------

std::vector<ThermalFrame> read_thermal(const fs::path& path) {
    const std::string buf = slurp(path);
    const std::string stream = "thermal";
    std::size_t off = 0;
    const auto w = get_le<std::uint32_t>(buf, off, stream);
    const auto h = get_le<std::uint32_t>(buf, off, stream);
    const auto n = get_le<std::uint32_t>(buf, off, stream);
    if (w < 1 || h < 1) throw DataError(stream, 0, "zero frame dimensions");
    const std::size_t cells = static_cast<std::size_t>(w) * h;
    if (buf.size() != 12 + static_cast<std::size_t>(n) * (8 + 4 * cells)) {
        throw DataError(stream, 0, "file size does not match header");
    }
    std::vector<ThermalFrame> frames;
    frames.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        ThermalFrame f;
        f.t = get_le<double>(buf, off, stream);
        check_timestamp(f.t, frames.empty() ? 0.0 : frames.back().t, i, stream);
        f.kelvin = Grid<float>(static_cast<int>(w), static_cast<int>(h));
        std::memcpy(f.kelvin.data().data(), buf.data() + off, 4 * cells);
        off += 4 * cells;
        for (float v : f.kelvin.data()) {
            if (!std::isfinite(v) || v <= 0.0f) throw DataError(stream, i, "temperature must be finite and > 0 K");
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

void write_thermal(const std::vector<ThermalFrame>& frames, const fs::path& path) {
    std::string buf;
    const std::uint32_t w = frames.empty() ? 1 : static_cast<std::uint32_t>(frames.front().kelvin.width());
    const std::uint32_t h = frames.empty() ? 1 : static_cast<std::uint32_t>(frames.front().kelvin.height());
    put_le<std::uint32_t>(buf, w);
    put_le<std::uint32_t>(buf, h);
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(frames.size()));
    buf.reserve(12 + frames.size() * (8 + 4 * static_cast<std::size_t>(w) * h));
    for (const auto& f : frames) {
        if (f.kelvin.width() != static_cast<int>(w) || f.kelvin.height() != static_cast<int>(h)) {
            throw std::invalid_argument("thermal frames must share dimensions");
        }
        put_le<double>(buf, f.t);
        buf.append(reinterpret_cast<const char*>(f.kelvin.data().data()), 4 * f.kelvin.size());
    }
    write_file(path, buf);
}

// ---- robot ------------------------------------------------------------------

std::vector<RobotSample> read_robot(const fs::path& path) {
    const std::string stream = "robot";
    const auto table = csv::read(path, stream);
    const std::vector<std::string> expect = {"t", "x", "y", "z", "laser_on", "feed"};
    if (table.header != expect) throw DataError(stream, 0, "header must be t,x,y,z,laser_on,feed");
    std::vector<RobotSample> out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        RobotSample s;
        s.t = field_real(r[0], stream, i);
        check_timestamp(s.t, out.empty() ? 0.0 : out.back().t, i, stream);
        s.position = {field_real(r[1], stream, i), field_real(r[2], stream, i), field_real(r[3], stream, i)};
        if (r[4] != "0" && r[4] != "1") throw DataError(stream, i, "laser_on must be 0 or 1");
        s.laser_on = r[4] == "1";
        s.feed = field_real(r[5], stream, i);
        out.push_back(s);
    }
    if (out.empty()) throw DataError(stream, 0, "robot stream is empty");
    return out;
}

void write_robot(const std::vector<RobotSample>& robot, const fs::path& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(robot.size());
    for (const auto& s : robot) {
        rows.push_back({format_real(s.t), format_real(s.position.x), format_real(s.position.y),
                        format_real(s.position.z), s.laser_on ? "1" : "0", format_real(s.feed)});
    }
    csv::write(path, {"t", "x", "y", "z", "laser_on", "feed"}, rows);
}

// ---- point clouds -----------------------------------------------------------

PointCloud read_xyz(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string stream = "scan:" + path.filename().string();
    PointCloud c;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b, d, extra;
        if (!(ls >> a >> b >> d) || (ls >> extra)) throw DataError(stream, row, "expected 'x y z'");
        c.points.push_back({field_real(a, stream, row), field_real(b, stream, row), field_real(d, stream, row)});
        ++row;
    }
    return c;
}

void write_xyz(const PointCloud& c, const fs::path& path) {
    std::string buf;
    buf.reserve(c.points.size() * 28);
    for (const auto& p : c.points) {
        buf += format_real(p.x);
        buf += ' ';
        buf += format_real(p.y);
        buf += ' ';
        buf += format_real(p.z);
        buf += '\n';
    }
    write_file(path, buf);
}

// ---- whole session ----------------------------------------------------------

Session load_session(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("session directory not found: " + dir.string());
    Session s;
    s.manifest = read_manifest(dir / "manifest.json");
    s.audio = read_wav(dir / "audio.wav");

    {
        const std::string stream = "meltpool";
        const auto idx = csv::read(dir / "meltpool" / "index.csv", stream);
        const auto ct = idx.column("t");
        const auto cf = idx.column("filename");
        for (std::size_t i = 0; i < idx.rows.size(); ++i) {
            MeltPoolFrame f;
            f.t = field_real(idx.rows[i][ct], stream, i);
            check_timestamp(f.t, s.meltpool.empty() ? 0.0 : s.meltpool.back().t, i, stream);
            f.image = read_pgm(dir / "meltpool" / idx.rows[i][cf]);
            s.meltpool.push_back(std::move(f));
        }
    }
    s.thermal = read_thermal(dir / "thermal.bin");
    s.robot = read_robot(dir / "robot.csv");
    {
        const std::string stream = "scans";
        const auto idx = csv::read(dir / "scans" / "index.csv", stream);
        const auto ct = idx.column("t");
        const auto cl = idx.column("layer");
        const auto cf = idx.column("filename");
        for (std::size_t i = 0; i < idx.rows.size(); ++i) {
            Scan sc;
            sc.t = field_real(idx.rows[i][ct], stream, i);
            check_timestamp(sc.t, s.scans.empty() ? 0.0 : s.scans.back().t, i, stream);
            sc.layer = field_int(idx.rows[i][cl], stream, i);
            sc.cloud = read_xyz(dir / "scans" / idx.rows[i][cf]);
            s.scans.push_back(std::move(sc));
        }
    }
    return s;
}

void store_session(const Session& s, const fs::path& dir) {
    fs::create_directories(dir / "meltpool");
    fs::create_directories(dir / "scans");
    write_manifest(s.manifest, dir / "manifest.json");
    write_wav(s.audio, dir / "audio.wav");

    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < s.meltpool.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06zu.pgm", i);
        write_pgm(s.meltpool[i].image, dir / "meltpool" / name);
        rows.push_back({format_real(s.meltpool[i].t), name});
    }
    csv::write(dir / "meltpool" / "index.csv", {"t", "filename"}, rows);

    write_thermal(s.thermal, dir / "thermal.bin");
    write_robot(s.robot, dir / "robot.csv");

    rows.clear();
    for (std::size_t i = 0; i < s.scans.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "scan_%03zu.xyz", i);
        write_xyz(s.scans[i].cloud, dir / "scans" / name);
        rows.push_back({format_real(s.scans[i].t), std::to_string(s.scans[i].layer), name});
    }
    csv::write(dir / "scans" / "index.csv", {"t", "layer", "filename"}, rows);
}

// ---- validation -------------------------------------------------------------

namespace {

template <class Range, class TimeOf>
void check_stream(const std::string& name, const Range& items, TimeOf time_of, double declared_hz,
                  ValidationReport& rep) {
    const std::size_t n = items.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = time_of(items[i]);
        if (!std::isfinite(t) || t < 0.0) {
            rep.violations.push_back({name, "timestamp", "non-finite or negative timestamp at index " + std::to_string(i)});
            return;
        }
        if (i > 0 && !(t > time_of(items[i - 1]))) {
            rep.violations.push_back({name, "timestamp", "timestamps not strictly increasing at index " + std::to_string(i)});
            return;
        }
    }
    if (n < 2) return;
    const double span = time_of(items[n - 1]) - time_of(items[0]);
    const double observed = static_cast<double>(n - 1) / span;
    if (std::abs(observed - declared_hz) > kRateTolerance * declared_hz) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "observed rate %.4g Hz vs declared %.4g Hz", observed, declared_hz);
        rep.violations.push_back({name, "rate", msg});
    }
}

}  // namespace

ValidationReport validate_session(const Session& s) {
    ValidationReport rep;
    const auto& m = s.manifest;

    if (s.robot.empty()) {
        rep.violations.push_back({"robot", "empty", "robot stream has no samples"});
    }
    check_stream("robot", s.robot, [](const RobotSample& r) { return r.t; }, m.rates.robot_hz, rep);
    check_stream("meltpool", s.meltpool, [](const MeltPoolFrame& f) { return f.t; }, m.rates.meltpool_hz, rep);
    check_stream("thermal", s.thermal, [](const ThermalFrame& f) { return f.t; }, m.rates.thermal_hz, rep);

    for (std::size_t i = 1; i < s.scans.size(); ++i) {
        if (!(s.scans[i].t > s.scans[i - 1].t)) {
            rep.violations.push_back({"scans", "timestamp", "timestamps not strictly increasing at index " + std::to_string(i)});
            break;
        }
    }

    if (std::abs(s.audio.rate - m.rates.audio_hz) > kRateTolerance * m.rates.audio_hz) {
        rep.violations.push_back({"audio", "rate", "wav rate " + format_real(s.audio.rate) + " Hz vs declared " +
                                                       format_real(m.rates.audio_hz) + " Hz"});
    }
    if (!s.robot.empty()) {
        const double expected = s.duration() * m.rates.audio_hz + 1.0;
        const double got = static_cast<double>(s.audio.samples.size());
        if (std::abs(got - expected) > static_cast<double>(kAudioSlackSamples)) {
            char msg[160];
            std::snprintf(msg, sizeof msg, "audio covers %.6g s but robot stream covers %.6g s",
                          s.audio.duration(), s.duration());
            rep.violations.push_back({"audio", "duration", msg});
        }
    }
    for (std::size_t i = 0; i < s.audio.samples.size(); ++i) {
        const double v = s.audio.samples[i];
        if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
            rep.violations.push_back({"audio", "value", "sample out of [-1,1] at index " + std::to_string(i)});
            break;
        }
    }

    for (std::size_t i = 0; i < s.meltpool.size(); ++i) {
        const auto& img = s.meltpool[i].image;
        if (img.width() != m.image_width || img.height() != m.image_height) {
            rep.violations.push_back({"meltpool", "dims", "frame " + std::to_string(i) + " dimensions differ from manifest"});
            break;
        }
    }
    for (std::size_t i = 0; i < s.thermal.size(); ++i) {
        const auto& g = s.thermal[i].kelvin;
        if (g.width() != m.thermal_width || g.height() != m.thermal_height) {
            rep.violations.push_back({"thermal", "dims", "frame " + std::to_string(i) + " dimensions differ from manifest"});
            break;
        }
    }
    return rep;
}

// ---- fused dataset ----------------------------------------------------------

std::vector<std::string> fused_header() {
    std::vector<std::string> h = {"t", "x", "y", "z", "laser_on"};
    const auto& names = feature_channel_names();
    h.insert(h.end(), names.begin(), names.end());
    h.insert(h.end(), {"valid_mp", "valid_ac", "valid_th"});
    return h;
}

void write_fused(const FusedDataset& d, const fs::path& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(d.records.size());
    for (const auto& r : d.records) {
        std::vector<std::string> row;
        row.reserve(5 + kFeatureChannels + 3);
        row.push_back(format_real(r.t));
        row.push_back(format_real(r.position.x));
        row.push_back(format_real(r.position.y));
        row.push_back(format_real(r.position.z));
        row.push_back(r.laser_on ? "1" : "0");
        for (double v : r.features) row.push_back(format_real(v));
        row.push_back(r.valid_mp ? "1" : "0");
        row.push_back(r.valid_ac ? "1" : "0");
        row.push_back(r.valid_th ? "1" : "0");
        rows.push_back(std::move(row));
    }
    csv::write(path, fused_header(), rows);
}

FusedDataset read_fused(const fs::path& path) {
    const std::string stream = "fused";
    const auto table = csv::read(path, stream);
    if (table.header != fused_header()) throw DataError(stream, 0, "unexpected fused.csv header");
    FusedDataset d;
    d.records.reserve(table.rows.size());
    auto flag = [&](const std::string& s, std::size_t i) {
        if (s != "0" && s != "1") throw DataError(stream, i, "flag must be 0 or 1");
        return s == "1";
    };
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        FusedRecord r;
        r.t = field_real(row[0], stream, i);
        check_timestamp(r.t, d.records.empty() ? 0.0 : d.records.back().t, i, stream);
        r.position = {field_real(row[1], stream, i), field_real(row[2], stream, i), field_real(row[3], stream, i)};
        r.laser_on = flag(row[4], i);
        for (std::size_t c = 0; c < kFeatureChannels; ++c) {
            try {
                r.features[c] = parse_real(row[5 + c]);
            } catch (const std::invalid_argument&) {
                throw DataError(stream, i, "bad feature field '" + row[5 + c] + "'");
            }
        }
        r.valid_mp = flag(row[5 + kFeatureChannels], i);
        r.valid_ac = flag(row[6 + kFeatureChannels], i);
        r.valid_th = flag(row[7 + kFeatureChannels], i);
        d.records.push_back(r);
    }
    return d;
}

}  // namespace lded::session
