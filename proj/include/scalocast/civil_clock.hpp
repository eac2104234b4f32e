#pragma once

#include "scalocast/series.hpp"

#include <memory>
#include <string>

namespace scalocast {

/// Maps UTC hours onto civil dates and hours in a fixed IANA zone.
/// All stored timestamps stay in UTC; only calendar questions go through here.
class CivilClock {
public:
    /// Throws ConfigError if the zone cannot be loaded.
    explicit CivilClock(std::string zone = "UTC");
    ~CivilClock();
    CivilClock(const CivilClock&);
    CivilClock& operator=(const CivilClock&);
    CivilClock(CivilClock&&) noexcept;
    CivilClock& operator=(CivilClock&&) noexcept;

    const std::string& zone() const { return zone_; }

    Date local_date(Hour t) const;
    int local_hour(Hour t) const;
    /// UTC hour containing local 00:00 of `date` (the earlier instant when
    /// midnight is repeated).
    Hour local_midnight(Date date) const;

private:
    struct Impl;
    std::string zone_;
    std::unique_ptr<Impl> impl_;
};

/// Monday = 0 … Sunday = 6.
int iso_weekday_index(Date date);
bool is_weekend(Date date);

} // namespace scalocast
