#pragma once

#include "hopfid/werner.hpp"
#include "hopfid/rational_map.hpp"
#include "hopfid/protocols.hpp"
#include "hopfid/schedule.hpp"
#include "hopfid/search.hpp"
#include "hopfid/mc_oracle.hpp"
#include "hopfid/sweep.hpp"
