#pragma once

#include "fedfhe/simnet/network.hpp"
#include "fedfhe/simnet/party.hpp"
#include "fedfhe/simnet/task.hpp"
#include "fedfhe/simnet/transcript.hpp"
