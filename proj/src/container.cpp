// SPDX-License-Identifier: Apache-2.0
#include "patchprobe/container.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <zlib.h>

#include "patchprobe/classfile.hpp"
#include "patchprobe/error.hpp"

namespace fs = std::filesystem;

namespace patchprobe::cf {

namespace {

std::vector<uint8_t> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::Io, "cannot open " + path.string());
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

std::string entry_to_class_name(const std::string& entry)
{
    std::string name = entry.substr(0, entry.size() - 6); // strip ".class"
    std::replace(name.begin(), name.end(), '/', '.');
    return name;
}

void insert_class(ContainerResult& result, const std::string& name, std::vector<uint8_t> bytes)
{
    auto [it, inserted] = result.classes.emplace(name, std::move(bytes));
    if (!inserted)
        result.warnings.push_back("DuplicateClassName: " + name + " (keeping first entry)");
}

uint16_t le16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
uint32_t le32(const uint8_t* p)
{
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) | (static_cast<uint32_t>(p[2]) << 16)
        | (static_cast<uint32_t>(p[3]) << 24);
}

std::vector<uint8_t> inflate_raw(const uint8_t* data, size_t size, size_t expected)
{
    std::vector<uint8_t> out(expected);
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK)
        fail(ErrorKind::Internal, "zlib init failed");
    zs.next_in = const_cast<Bytef*>(data);
    zs.avail_in = static_cast<uInt>(size);
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != expected)
        fail(ErrorKind::NotAnArchive, "deflate stream is corrupt");
    return out;
}

void read_zip(const std::vector<uint8_t>& data, ContainerResult& result)
{
    // Locate the end-of-central-directory record by scanning backwards.
    constexpr uint32_t kEocdSig = 0x06054b50;
    constexpr uint32_t kCenSig = 0x02014b50;
    constexpr uint32_t kLocSig = 0x04034b50;
    if (data.size() < 22)
        fail(ErrorKind::NotAnArchive, "file too small to be a zip archive");
    size_t eocd = std::string::npos;
    size_t scan_limit = data.size() >= 22 + 65535 ? data.size() - 22 - 65535 : 0;
    for (size_t i = data.size() - 22 + 1; i-- > scan_limit;) {
        if (le32(data.data() + i) == kEocdSig) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string::npos)
        fail(ErrorKind::NotAnArchive, "no zip end-of-central-directory record");

    uint16_t entry_count = le16(data.data() + eocd + 10);
    uint32_t cen_offset = le32(data.data() + eocd + 16);
    size_t pos = cen_offset;
    for (uint16_t i = 0; i < entry_count; ++i) {
        if (pos + 46 > data.size() || le32(data.data() + pos) != kCenSig)
            fail(ErrorKind::NotAnArchive, "corrupt central directory");
        const uint8_t* cen = data.data() + pos;
        uint16_t method = le16(cen + 10);
        uint32_t comp_size = le32(cen + 20);
        uint32_t uncomp_size = le32(cen + 24);
        uint16_t name_len = le16(cen + 28);
        uint16_t extra_len = le16(cen + 30);
        uint16_t comment_len = le16(cen + 32);
        uint32_t local_offset = le32(cen + 42);
        if (pos + 46 + name_len > data.size())
            fail(ErrorKind::NotAnArchive, "corrupt central directory entry name");
        std::string name(reinterpret_cast<const char*>(cen + 46), name_len);
        pos += 46u + name_len + extra_len + comment_len;

        if (name.size() < 7 || name.substr(name.size() - 6) != ".class" || name.back() == '/')
            continue;

        if (local_offset + 30 > data.size() || le32(data.data() + local_offset) != kLocSig)
            fail(ErrorKind::NotAnArchive, "corrupt local file header for " + name);
        const uint8_t* loc = data.data() + local_offset;
        uint16_t loc_name_len = le16(loc + 26);
        uint16_t loc_extra_len = le16(loc + 28);
        size_t data_offset = local_offset + 30u + loc_name_len + loc_extra_len;
        if (data_offset + comp_size > data.size())
            fail(ErrorKind::NotAnArchive, "entry data exceeds archive for " + name);

        std::vector<uint8_t> bytes;
        if (method == 0) {
            bytes.assign(data.begin() + data_offset, data.begin() + data_offset + comp_size);
        } else if (method == 8) {
            bytes = inflate_raw(data.data() + data_offset, comp_size, uncomp_size);
        } else {
            result.warnings.push_back("skipping entry with unsupported compression method: " + name);
            continue;
        }
        insert_class(result, entry_to_class_name(name), std::move(bytes));
    }
}

void read_directory(const fs::path& root, ContainerResult& result)
{
    std::vector<fs::path> files;
    for (const auto& de : fs::recursive_directory_iterator(root)) {
        if (de.is_regular_file() && de.path().extension() == ".class")
            files.push_back(de.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& p : files) {
        std::string rel = fs::relative(p, root).generic_string();
        insert_class(result, entry_to_class_name(rel), read_file(p));
    }
}

} // namespace

ContainerResult read_container(const std::string& path)
{
    ContainerResult result;
    fs::path p(path);
    if (!fs::exists(p))
        fail(ErrorKind::Io, "no such file or directory: " + path);

    if (fs::is_directory(p)) {
        read_directory(p, result);
        return result;
    }

    std::vector<uint8_t> data = read_file(p);
    if (data.size() >= 4 && data[0] == 0xCA && data[1] == 0xFE && data[2] == 0xBA && data[3] == 0xBE) {
        // Single class file: the entry path carries no package, so take the
        // name from the class itself.
        RawClass cls = parse_class(data);
        result.classes.emplace(cls.this_class, std::move(data));
        return result;
    }
    if (data.size() >= 4 && data[0] == 'P' && data[1] == 'K') {
        read_zip(data, result);
        return result;
    }
    fail(ErrorKind::NotAnArchive, path + " is neither a class file, a directory, nor a zip archive");
}

} // namespace patchprobe::cf
