#pragma once

#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pet/error.hpp"
#include "pet/mosaic.hpp"

namespace pet {

/// Gaze direction in degrees. Yaw positive rightward, pitch positive upward.
struct GazeAngles {
    double yaw = 0.0;
    double pitch = 0.0;

    bool operator==(const GazeAngles&) const = default;
};

struct GazeRecord {
    std::string frame_path;  // as written in the manifest (relative to its directory)
    GazeAngles gaze_gt;
    std::string condition_tag;
    std::string sequence_name;
};

struct ParticipantEntry {
    std::string participant_id;
    std::string eye = "left";                        // left | right
    std::string camera_position = "lower_temporal";  // higher_temporal | lower_temporal
    std::vector<GazeRecord> records;
};

/// Per-participant, per-frame records; loaded from a JSON manifest.
/// Record order within a participant is preserved exactly.
struct GazeDataset {
    std::vector<ParticipantEntry> participants;
    std::filesystem::path root;  // directory of the manifest; frame paths resolve against it

    std::filesystem::path resolve(const std::string& frame_path) const {
        std::filesystem::path p(frame_path);
        return p.is_absolute() ? p : root / p;
    }
};

inline nlohmann::json manifest_to_json(const GazeDataset& dataset) {
    nlohmann::json participants = nlohmann::json::array();
    for (const auto& part : dataset.participants) {
        nlohmann::json records = nlohmann::json::array();
        for (const auto& rec : part.records) {
            records.push_back({
                {"frame_path", rec.frame_path},
                {"gaze_gt", {rec.gaze_gt.yaw, rec.gaze_gt.pitch}},
                {"condition_tag", rec.condition_tag},
                {"sequence_name", rec.sequence_name},
            });
        }
        participants.push_back({
            {"participant_id", part.participant_id},
            {"eye", part.eye},
            {"camera_position", part.camera_position},
            {"records", records},
        });
    }
    return nlohmann::json{{"participants", participants}};
}

inline void save_gaze_dataset(const GazeDataset& dataset, const std::filesystem::path& path) {
    detail::write_text_file(path, manifest_to_json(dataset).dump(2) + "\n");
}

/// Loads and validates a manifest. Participant ids must be unique, gaze
/// angles within [-90, 90] degrees, and every frame path resolvable on disk.
inline GazeDataset load_gaze_dataset(const std::filesystem::path& manifest_path) {
    nlohmann::json j = detail::read_json_file(manifest_path);
    GazeDataset dataset;
    dataset.root = manifest_path.parent_path();

    std::set<std::string> seen_ids;
    try {
        for (const auto& pj : j.at("participants")) {
            ParticipantEntry part;
            part.participant_id = pj.at("participant_id").get<std::string>();
            part.eye = pj.value("eye", "left");
            part.camera_position = pj.value("camera_position", "lower_temporal");
            require(seen_ids.insert(part.participant_id).second, Errc::duplicate_participant,
                    part.participant_id);
            for (const auto& rj : pj.at("records")) {
                GazeRecord rec;
                rec.frame_path = rj.at("frame_path").get<std::string>();
                auto gt = rj.at("gaze_gt");
                require(gt.is_array() && gt.size() == 2, Errc::parse_error, "gaze_gt must be [yaw, pitch]");
                rec.gaze_gt = {gt[0].get<double>(), gt[1].get<double>()};
                require(std::abs(rec.gaze_gt.yaw) <= 90.0 && std::abs(rec.gaze_gt.pitch) <= 90.0,
                        Errc::parse_error, "gaze angles outside [-90, 90] degrees");
                rec.condition_tag = rj.value("condition_tag", "");
                rec.sequence_name = rj.value("sequence_name", "");
                require(std::filesystem::exists(dataset.resolve(rec.frame_path)),
                        Errc::unresolved_frame_path, rec.frame_path);
                part.records.push_back(std::move(rec));
            }
            dataset.participants.push_back(std::move(part));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, manifest_path.string() + ": " + e.what());
    }
    return dataset;
}

}  // namespace pet
