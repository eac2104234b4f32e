#include "scalocast/civil_clock.hpp"

#include "scalocast/error.hpp"

#include <absl/time/civil_time.h>
#include <absl/time/time.h>

namespace scalocast {

struct CivilClock::Impl {
    absl::TimeZone tz;
};

CivilClock::CivilClock(std::string zone) : zone_(std::move(zone)), impl_(std::make_unique<Impl>()) {
    if (!absl::LoadTimeZone(zone_, &impl_->tz))
        throw ConfigError("unknown time zone '" + zone_ + "'");
}

CivilClock::~CivilClock() = default;
CivilClock::CivilClock(const CivilClock& other) : zone_(other.zone_), impl_(std::make_unique<Impl>(*other.impl_)) {}
CivilClock& CivilClock::operator=(const CivilClock& other) {
    if (this != &other) {
        zone_ = other.zone_;
        impl_ = std::make_unique<Impl>(*other.impl_);
    }
    return *this;
}
CivilClock::CivilClock(CivilClock&&) noexcept = default;
CivilClock& CivilClock::operator=(CivilClock&&) noexcept = default;

namespace {

absl::Time to_absl(Hour t) { return absl::FromUnixSeconds(static_cast<std::int64_t>(t.time_since_epoch().count()) * 3600); }

} // namespace

Date CivilClock::local_date(Hour t) const {
    const auto cs = absl::ToCivilSecond(to_absl(t), impl_->tz);
    return Date{std::chrono::year{static_cast<int>(cs.year())}, std::chrono::month{static_cast<unsigned>(cs.month())},
                std::chrono::day{static_cast<unsigned>(cs.day())}};
}

int CivilClock::local_hour(Hour t) const { return absl::ToCivilSecond(to_absl(t), impl_->tz).hour(); }

Hour CivilClock::local_midnight(Date date) const {
    const absl::CivilSecond cs(static_cast<int>(date.year()), static_cast<unsigned>(date.month()),
                               static_cast<unsigned>(date.day()), 0, 0, 0);
    const auto lookup = impl_->tz.At(cs);
    const absl::Time instant = lookup.kind == absl::TimeZone::TimeInfo::SKIPPED ? lookup.trans : lookup.pre;
    const auto secs = absl::ToUnixSeconds(instant);
    // Floor to the containing UTC hour (non-integral offsets).
    auto h = secs / 3600;
    if (secs % 3600 < 0)
        --h;
    return Hour{std::chrono::hours{h}};
}

int iso_weekday_index(Date date) {
    const std::chrono::weekday wd{std::chrono::sys_days{date}};
    return static_cast<int>(wd.iso_encoding()) - 1;
}

bool is_weekend(Date date) { return iso_weekday_index(date) >= 5; }

} // namespace scalocast
