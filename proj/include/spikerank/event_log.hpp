#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace spikerank {

using UserIndex = std::uint32_t;

/// Half-open time interval [start, end) in seconds since the log epoch.
struct Window {
    double start = 0.0;
    double end = 0.0;

    bool contains(double t) const { return t >= start && t < end; }
};

/// Throws ArgumentError unless start < end (and both are finite).
void check_window(const Window& w, std::string_view what);

/// One directed message as read from the input: `sender` sent to `receiver` at `time`.
struct EventRecord {
    double time = 0.0;
    std::string sender;
    std::string receiver;
};

/// An event after user indexing.
struct Event {
    double time = 0.0;
    UserIndex sender = 0;
    UserIndex receiver = 0;

    friend bool operator==(const Event&, const Event&) = default;
};

/// Bijection between user identifiers and dense indices 0..N-1.
class UserTable {
public:
    /// Index for `name`, inserting it with the next free index if unseen.
    UserIndex intern(std::string_view name);

    std::optional<UserIndex> find(std::string_view name) const;
    const std::string& name(UserIndex idx) const { return names_.at(idx); }
    std::size_t size() const { return names_.size(); }
    std::span<const std::string> names() const { return names_; }

    friend bool operator==(const UserTable& a, const UserTable& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, UserIndex> index_;
};

/// Time-ordered directed message events with a dense user index.
///
/// Events are sorted non-decreasing by time; ties keep input order. Users are
/// indexed by first appearance in that order (sender before receiver).
class EventLog {
public:
    EventLog() = default;

    static EventLog from_records(std::span<const EventRecord> records);

    std::span<const Event> events() const { return events_; }
    const UserTable& users() const { return users_; }
    std::size_t n_users() const { return users_.size(); }
    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }

    /// Range of events with time in w, as [first, last) positions into events().
    std::pair<std::size_t, std::size_t> range(const Window& w) const;

    friend bool operator==(const EventLog&, const EventLog&) = default;

private:
    friend EventLog parse_events(std::istream& in);
    friend EventLog parse_events(std::string_view text);

    std::vector<Event> events_;
    UserTable users_;
};

/// Parses the `time,sender,receiver` CSV. Throws ParseError with the 1-based
/// line number on a malformed row. A header-only input yields an empty log.
EventLog parse_events(std::string_view text);
EventLog parse_events(std::istream& in);

/// Writes the event CSV in time order, times in shortest round-trip form.
void write_events(std::ostream& out, const EventLog& log);
std::string serialize_events(const EventLog& log);

/// Shortest decimal that parses back to exactly `v`.
std::string format_shortest(double v);

/// Per-bin, per-user send activity over a window.
struct SendSeries {
    double bin_width = 0.0;
    double t0 = 0.0;
    std::size_t bins = 0;
    std::size_t n_users = 0;
    std::vector<std::uint32_t> counts;   // bins x n_users, row-major
    std::vector<std::uint8_t> indicator; // counts >= 1

    std::uint32_t count(std::size_t bin, UserIndex user) const { return counts[bin * n_users + user]; }
    std::uint8_t active(std::size_t bin, UserIndex user) const {
        return indicator[bin * n_users + user];
    }
    std::span<const std::uint8_t> indicator_row(std::size_t bin) const {
        return std::span(indicator).subspan(bin * n_users, n_users);
    }
};

/// Bins sends over `window`. Bin k covers [start + k*width, start + (k+1)*width);
/// ceil((end - start) / width) bins in total.
SendSeries bin_sends(const EventLog& log, double bin_width, const Window& window);

/// Total sends per bin from time 0 through the last event's bin. Empty log gives an empty series.
std::vector<std::uint64_t> volume_series(const EventLog& log, double bin_width);

/// b_i = number of events sent by user i inside the window (unnormalized).
std::vector<double> basal_rates(const EventLog& log, const Window& window);

} // namespace spikerank
