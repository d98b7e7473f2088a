#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wardboost/dataset.hpp"

namespace wardboost {

// Formats a double with the shortest representation that parses back to the
// same bits. Used by every CSV writer so round trips are exact.
std::string format_double(double v);

// Events CSV: encounter_id,patient_id,time,vital,value
std::vector<VitalEvent> load_events_csv(const std::string& path);
void write_events_csv(const std::string& path, std::span<const VitalEvent> events);

// Encounters CSV: encounter_id,patient_id,age_years,transferred,transfer_time
// (events are not attached; see assemble_encounters).
std::vector<Encounter> load_encounters_csv(const std::string& path);
void write_encounters_csv(const std::string& path, std::span<const Encounter> encounters);

// Attaches events to their encounters and sorts each event list by time.
// Events referencing an unknown encounter_id are a data error.
std::vector<Encounter> assemble_encounters(std::vector<Encounter> encounters,
                                           std::span<const VitalEvent> events);

// Snapshot CSV: hr,o2,rr,temp,dbp,sbp,age,pp,map,si,label,encounter_id,patient_id
// An empty cell is a missing value.
std::vector<FeatureSnapshot> load_snapshots_csv(const std::string& path);
void write_snapshots_csv(const std::string& path, std::span<const FeatureSnapshot> snapshots);

}  // namespace wardboost
