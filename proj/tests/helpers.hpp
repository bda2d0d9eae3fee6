#pragma once

#include <doctest.h>

#include <string>

#include "guitraj/core/types.hpp"
#include "guitraj/error.hpp"

namespace testutil {

template <typename Fn>
guitraj::errc code_of(Fn&& fn) {
    try {
        fn();
    } catch (const guitraj::error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return guitraj::errc::invalid_argument;
}

inline guitraj::user_action action(std::string type, guitraj::param_map params = {}, double t = 0,
                                   std::string instruction = "do it") {
    guitraj::user_action a;
    a.at = guitraj::timestamp{t};
    a.action_type = std::move(type);
    a.grounding_instruction = std::move(instruction);
    a.action_reason = "because";
    a.action_parameters = std::move(params);
    a.core_change_reason = "r";
    a.core_change = "c";
    return a;
}

inline guitraj::task_annotation task(int id, std::vector<guitraj::user_action> actions,
                                     guitraj::platform os = guitraj::platform::windows) {
    guitraj::task_annotation t;
    t.task_id = id;
    t.instruction = "task " + std::to_string(id);
    t.dense_caption = "caption";
    t.plan = "plan";
    t.os = os;
    t.software = "Excel";
    t.user_actions = std::move(actions);
    t.refresh_complete();
    return t;
}

inline guitraj::fs::path scratch(const std::string& name) {
    const auto dir = guitraj::fs::temp_directory_path() / ("guitraj_test_" + name);
    guitraj::fs::remove_all(dir);
    guitraj::fs::create_directories(dir);
    return dir;
}

}  // namespace testutil
