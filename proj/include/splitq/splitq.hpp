#pragma once

#include "splitq/adaptive.hpp"
#include "splitq/agent.hpp"
#include "splitq/bias_profile.hpp"
#include "splitq/environment.hpp"
#include "splitq/environments.hpp"
#include "splitq/gp_ucb.hpp"
#include "splitq/recovery.hpp"
#include "splitq/reward_transform.hpp"
#include "splitq/split_q.hpp"
#include "splitq/value_iteration.hpp"
