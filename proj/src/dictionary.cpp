#include "wikiwalk/dictionary.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "wikiwalk/binio.hpp"

namespace wikiwalk {

namespace {

constexpr char kDictMagic[] = {'G', 'W', 'D', 'I', 'C', 'T', '1'};
constexpr std::size_t kHeaderBytes = sizeof(kDictMagic) + 4 * 8;
constexpr std::size_t kEntryBytes = 4 * 8;
constexpr std::size_t kTripleBytes = 4 + 8 + 8;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

void sort_candidates(std::vector<Candidate>& cands) {
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.prior != b.prior) return a.prior > b.prior;
        return a.article < b.article;
    });
}

class MemoryStore final : public DictionaryStore {
public:
    explicit MemoryStore(std::vector<DictEntry> entries) {
        for (auto& e : entries) {
            max_tokens_ = std::max(max_tokens_, token_count(e.mention));
            auto key = e.mention;
            map_.emplace(std::move(key), std::move(e));
        }
    }

    std::optional<DictEntry> find(std::string_view normalized) const override {
        const auto it = map_.find(std::string(normalized));
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }
    std::size_t size() const override { return map_.size(); }
    std::size_t max_tokens() const override { return max_tokens_; }
    std::vector<DictEntry> entries() const override {
        std::vector<DictEntry> out;
        out.reserve(map_.size());
        for (const auto& [k, e] : map_) out.push_back(e);
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.mention < b.mention; });
        return out;
    }

private:
    std::unordered_map<std::string, DictEntry> map_;
    std::size_t max_tokens_ = 0;
};

// Serves lookups straight from a GWDICT1 file with pread, binary searching the
// sorted entry table. Only the header is held in memory.
class DiskStore final : public DictionaryStore {
public:
    explicit DiskStore(const std::filesystem::path& path) : path_(path.string()) {
        fd_ = ::open(path_.c_str(), O_RDONLY);
        if (fd_ < 0) throw DataError("cannot open dictionary snapshot " + path_);
        unsigned char header[kHeaderBytes];
        read_at(header, sizeof(header), 0);
        if (std::memcmp(header, kDictMagic, sizeof(kDictMagic)) != 0) {
            ::close(fd_);
            throw DataError(path_ + ": not a GWDICT1 snapshot");
        }
        const unsigned char* p = header + sizeof(kDictMagic);
        entries_ = binio::decode_u64(p);
        triples_ = binio::decode_u64(p + 8);
        max_tokens_ = binio::decode_u64(p + 16);
        strtab_bytes_ = binio::decode_u64(p + 24);
        entry_base_ = kHeaderBytes;
        triple_base_ = entry_base_ + entries_ * kEntryBytes;
        strtab_base_ = triple_base_ + triples_ * kTripleBytes;
    }
    ~DiskStore() override { ::close(fd_); }
    DiskStore(const DiskStore&) = delete;
    DiskStore& operator=(const DiskStore&) = delete;

    std::optional<DictEntry> find(std::string_view normalized) const override {
        std::uint64_t lo = 0, hi = entries_;
        while (lo < hi) {
            const auto mid = lo + (hi - lo) / 2;
            const auto rec = entry(mid);
            const auto key = mention(rec);
            const int cmp = key.compare(normalized);
            if (cmp == 0) return materialize(rec, std::move(key));
            if (cmp < 0) lo = mid + 1;
            else hi = mid;
        }
        return std::nullopt;
    }
    std::size_t size() const override { return entries_; }
    std::size_t max_tokens() const override { return max_tokens_; }
    std::vector<DictEntry> entries() const override {
        std::vector<DictEntry> out;
        out.reserve(entries_);
        for (std::uint64_t i = 0; i < entries_; ++i) {
            const auto rec = entry(i);
            out.push_back(materialize(rec, mention(rec)));
        }
        return out;
    }

private:
    struct EntryRecord {
        std::uint64_t str_off, str_len, triple_begin, triple_count;
    };

    void read_at(void* buf, std::size_t n, std::uint64_t off) const {
        auto* dst = static_cast<unsigned char*>(buf);
        while (n > 0) {
            const auto got = ::pread(fd_, dst, n, static_cast<off_t>(off));
            if (got <= 0) throw DataError(path_ + ": truncated dictionary snapshot");
            dst += got;
            n -= static_cast<std::size_t>(got);
            off += static_cast<std::uint64_t>(got);
        }
    }

    EntryRecord entry(std::uint64_t i) const {
        unsigned char buf[kEntryBytes];
        read_at(buf, sizeof(buf), entry_base_ + i * kEntryBytes);
        return {binio::decode_u64(buf), binio::decode_u64(buf + 8), binio::decode_u64(buf + 16), binio::decode_u64(buf + 24)};
    }

    std::string mention(const EntryRecord& rec) const {
        std::string s(rec.str_len, '\0');
        if (rec.str_len > 0) read_at(s.data(), rec.str_len, strtab_base_ + rec.str_off);
        return s;
    }

    DictEntry materialize(const EntryRecord& rec, std::string key) const {
        DictEntry e{std::move(key), {}};
        std::vector<unsigned char> buf(rec.triple_count * kTripleBytes);
        if (!buf.empty()) read_at(buf.data(), buf.size(), triple_base_ + rec.triple_begin * kTripleBytes);
        for (std::uint64_t t = 0; t < rec.triple_count; ++t) {
            const unsigned char* p = buf.data() + t * kTripleBytes;
            e.candidates.push_back({binio::decode_u32(p), binio::decode_u64(p + 4), binio::decode_f64(p + 12)});
        }
        return e;
    }

    std::string path_;
    int fd_ = -1;
    std::uint64_t entries_ = 0, triples_ = 0, max_tokens_ = 0, strtab_bytes_ = 0;
    std::uint64_t entry_base_ = 0, triple_base_ = 0, strtab_base_ = 0;
};

}  // namespace

double DictEntry::prior_of(NodeId article) const {
    for (const auto& c : candidates)
        if (c.article == article) return c.prior;
    return 0.0;
}

std::string normalize_mention(std::string_view raw) {
    std::string stripped;
    stripped.reserve(raw.size());
    int depth = 0;
    for (char c : raw) {
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            if (depth > 0) --depth;
        } else if (depth == 0) {
            stripped += ascii_lower(c);
        }
    }
    std::string out;
    out.reserve(stripped.size());
    bool pending_space = false;
    for (char c : stripped) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    const auto norm = normalize_mention(text);
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start < norm.size()) {
        auto sp = norm.find(' ', start);
        if (sp == std::string::npos) sp = norm.size();
        tokens.emplace_back(norm.substr(start, sp - start));
        start = sp + 1;
    }
    return tokens;
}

std::size_t token_count(std::string_view normalized) {
    if (normalized.empty()) return 0;
    return static_cast<std::size_t>(std::count(normalized.begin(), normalized.end(), ' ')) + 1;
}

std::vector<CountRow> load_count_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<CountRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1) continue;
        const auto row = chomp(line);
        if (row.empty()) continue;
        const auto f = split_tabs(row);
        const auto where = path.string() + ":" + std::to_string(lineno);
        if (f.size() != 3) throw DataError(where + ": expected mention<TAB>article_id<TAB>count");
        try {
            rows.push_back({std::string(f[0]), static_cast<NodeId>(std::stoul(std::string(f[1]))),
                            std::stoull(std::string(f[2]))});
        } catch (const std::exception&) {
            throw DataError(where + ": non-numeric field");
        }
    }
    return rows;
}

Dictionary::Dictionary(std::shared_ptr<const DictionaryStore> store) : store_(std::move(store)) {}

Dictionary Dictionary::build(std::span<const CountRow> rows, std::optional<std::size_t> node_count, BuildTally* tally) {
    BuildTally local;
    std::map<std::string, std::map<NodeId, std::uint64_t>> grouped;
    for (const auto& r : rows) {
        auto key = normalize_mention(r.mention);
        if (key.empty()) {
            ++local.dropped_empty_mention;
            continue;
        }
        if (node_count && r.article >= *node_count)
            throw DataError("dictionary candidate " + std::to_string(r.article) + " is not in the node universe");
        grouped[std::move(key)][r.article] += r.count;
    }
    std::vector<DictEntry> entries;
    entries.reserve(grouped.size());
    for (auto& [mention, counts] : grouped) {
        std::uint64_t total = 0;
        for (const auto& [id, c] : counts) total += c;
        if (total == 0) {
            ++local.dropped_zero_total;
            continue;
        }
        DictEntry e{mention, {}};
        for (const auto& [id, c] : counts)
            if (c > 0) e.candidates.push_back({id, c, static_cast<double>(c) / static_cast<double>(total)});
        sort_candidates(e.candidates);
        entries.push_back(std::move(e));
    }
    if (tally) *tally = local;
    return Dictionary(std::make_shared<MemoryStore>(std::move(entries)));
}

void Dictionary::save(const std::filesystem::path& path) const {
    const auto all = entries();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    std::uint64_t triples = 0, strtab = 0;
    for (const auto& e : all) {
        triples += e.candidates.size();
        strtab += e.mention.size();
    }
    binio::put_bytes(out, kDictMagic, sizeof(kDictMagic));
    binio::put_u64(out, all.size());
    binio::put_u64(out, triples);
    binio::put_u64(out, max_tokens());
    binio::put_u64(out, strtab);
    std::uint64_t str_off = 0, triple_off = 0;
    for (const auto& e : all) {
        binio::put_u64(out, str_off);
        binio::put_u64(out, e.mention.size());
        binio::put_u64(out, triple_off);
        binio::put_u64(out, e.candidates.size());
        str_off += e.mention.size();
        triple_off += e.candidates.size();
    }
    for (const auto& e : all)
        for (const auto& c : e.candidates) {
            binio::put_u32(out, c.article);
            binio::put_u64(out, c.count);
            binio::put_f64(out, c.prior);
        }
    for (const auto& e : all) binio::put_bytes(out, e.mention.data(), e.mention.size());
    if (!out) throw DataError("failed writing " + path.string());
}

Dictionary Dictionary::open(const std::filesystem::path& path, DictionaryBackend backend) {
    auto disk = std::make_shared<DiskStore>(path);
    if (backend == DictionaryBackend::Disk) return Dictionary(std::move(disk));
    return Dictionary(std::make_shared<MemoryStore>(disk->entries()));
}

std::optional<DictEntry> Dictionary::lookup(std::string_view raw) const { return find_normalized(normalize_mention(raw)); }

std::optional<DictEntry> Dictionary::find_normalized(std::string_view normalized) const {
    if (!store_ || normalized.empty()) return std::nullopt;
    return store_->find(normalized);
}

std::vector<DictMatch> Dictionary::longest_match_scan(std::span<const std::string> tokens) const {
    std::vector<DictMatch> matches;
    const std::size_t longest = max_tokens();
    std::size_t pos = 0;
    std::string key;
    while (pos < tokens.size()) {
        const std::size_t limit = std::min(longest, tokens.size() - pos);
        bool found = false;
        for (std::size_t len = limit; len >= 1; --len) {
            key.clear();
            for (std::size_t i = 0; i < len; ++i) {
                if (i) key += ' ';
                key += tokens[pos + i];
            }
            if (auto e = find_normalized(key)) {
                matches.push_back({pos, pos + len, std::move(*e)});
                pos += len;
                found = true;
                break;
            }
        }
        if (!found) ++pos;
    }
    return matches;
}

std::vector<DictEntry> Dictionary::entries() const { return store_ ? store_->entries() : std::vector<DictEntry>{}; }

}  // namespace wikiwalk
