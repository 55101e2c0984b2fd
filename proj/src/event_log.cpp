#include "spikerank/event_log.hpp"

#include "spikerank/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace spikerank {

namespace {

constexpr std::string_view kHeader = "time,sender,receiver";

struct RawRow {
    double time;
    std::string_view sender;
    std::string_view receiver;
};

// Stable by time, then interns users in that order.
template <typename Row>
std::pair<std::vector<Event>, UserTable> index_rows(std::span<const Row> rows) {
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a].time < rows[b].time; });

    UserTable users;
    std::vector<Event> events;
    events.reserve(rows.size());
    for (std::size_t idx : order) {
        const Row& row = rows[idx];
        UserIndex s = users.intern(row.sender);
        UserIndex r = users.intern(row.receiver);
        events.push_back(Event{row.time, s, r});
    }
    return {std::move(events), std::move(users)};
}

double parse_time(std::string_view field, std::size_t line) {
    double t = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, t, std::chars_format::general);
    if (field.empty() || ec != std::errc{} || ptr != last) {
        throw ParseError(line, "time is not a decimal number: '" + std::string(field) + "'");
    }
    if (!std::isfinite(t)) throw ParseError(line, "time must be finite");
    if (t < 0.0) throw ParseError(line, "time must be non-negative");
    return t == 0.0 ? 0.0 : t; // folds -0 into +0
}

} // namespace

void check_window(const Window& w, std::string_view what) {
    if (!std::isfinite(w.start) || !std::isfinite(w.end) || !(w.start < w.end)) {
        throw ArgumentError(std::string(what) + ": window must satisfy start < end");
    }
}

UserIndex UserTable::intern(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    if (names_.size() >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
        throw ArgumentError("too many users for 31-bit indices");
    }
    auto idx = static_cast<UserIndex>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), idx);
    return idx;
}

std::optional<UserIndex> UserTable::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

EventLog EventLog::from_records(std::span<const EventRecord> records) {
    for (const auto& r : records) {
        if (!std::isfinite(r.time) || r.time < 0.0) throw ArgumentError("event time must be finite and >= 0");
    }
    EventLog log;
    std::tie(log.events_, log.users_) = index_rows(records);
    return log;
}

std::pair<std::size_t, std::size_t> EventLog::range(const Window& w) const {
    auto lo = std::lower_bound(events_.begin(), events_.end(), w.start,
                               [](const Event& e, double t) { return e.time < t; });
    auto hi = std::lower_bound(lo, events_.end(), w.end,
                               [](const Event& e, double t) { return e.time < t; });
    return {static_cast<std::size_t>(lo - events_.begin()),
            static_cast<std::size_t>(hi - events_.begin())};
}

EventLog parse_events(std::string_view text) {
    std::vector<RawRow> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_header = false;

    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (!saw_header) {
            if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
            if (line != kHeader) throw ParseError(line_no, "expected header 'time,sender,receiver'");
            saw_header = true;
            continue;
        }
        if (line.empty()) {
            // only a trailing blank line is tolerated
            if (pos >= text.size()) break;
            throw ParseError(line_no, "empty row");
        }

        std::size_t c1 = line.find(',');
        std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
            throw ParseError(line_no, "expected 3 fields");
        }
        std::string_view sender = line.substr(c1 + 1, c2 - c1 - 1);
        std::string_view receiver = line.substr(c2 + 1);
        if (sender.empty() || receiver.empty()) throw ParseError(line_no, "empty user identifier");
        rows.push_back(RawRow{parse_time(line.substr(0, c1), line_no), sender, receiver});
    }
    if (!saw_header) throw ParseError(1, "missing header 'time,sender,receiver'");

    EventLog log;
    std::tie(log.events_, log.users_) = index_rows<RawRow>(rows);
    return log;
}

EventLog parse_events(std::istream& in) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (in.bad()) throw ParseError(0, "read failure");
    return parse_events(std::string_view(text));
}

std::string format_shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_events(std::ostream& out, const EventLog& log) {
    out << kHeader << '\n';
    char buf[64];
    for (const Event& e : log.events()) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), e.time);
        out.write(buf, ptr - buf);
        out << ',' << log.users().name(e.sender) << ',' << log.users().name(e.receiver) << '\n';
    }
}

std::string serialize_events(const EventLog& log) {
    std::ostringstream os;
    write_events(os, log);
    return os.str();
}

SendSeries bin_sends(const EventLog& log, double bin_width, const Window& window) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw ArgumentError("bin_sends: bin_width must be > 0");
    check_window(window, "bin_sends");

    SendSeries out;
    out.bin_width = bin_width;
    out.t0 = window.start;
    out.bins = static_cast<std::size_t>(std::ceil((window.end - window.start) / bin_width));
    out.n_users = log.n_users();
    out.counts.assign(out.bins * out.n_users, 0);
    out.indicator.assign(out.bins * out.n_users, 0);

    auto [first, last] = log.range(window);
    auto events = log.events();
    for (std::size_t p = first; p < last; ++p) {
        const Event& e = events[p];
        auto k = static_cast<std::size_t>(std::floor((e.time - window.start) / bin_width));
        if (k >= out.bins) k = out.bins - 1;
        std::size_t cell = k * out.n_users + e.sender;
        ++out.counts[cell];
        out.indicator[cell] = 1;
    }
    return out;
}

std::vector<std::uint64_t> volume_series(const EventLog& log, double bin_width) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw ArgumentError("volume_series: bin_width must be > 0");
    std::vector<std::uint64_t> volume;
    if (log.empty()) return volume;
    volume.assign(static_cast<std::size_t>(std::floor(log.events().back().time / bin_width)) + 1, 0);
    for (const Event& e : log.events()) {
        auto k = static_cast<std::size_t>(std::floor(e.time / bin_width));
        ++volume[std::min(k, volume.size() - 1)];
    }
    return volume;
}

std::vector<double> basal_rates(const EventLog& log, const Window& window) {
    check_window(window, "basal_rates");
    std::vector<double> b(log.n_users(), 0.0);
    auto [first, last] = log.range(window);
    auto events = log.events();
    for (std::size_t p = first; p < last; ++p) b[events[p].sender] += 1.0;
    return b;
}

} // namespace spikerank
