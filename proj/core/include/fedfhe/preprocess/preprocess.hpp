#pragma once

#include "fedfhe/preprocess/binning.hpp"
#include "fedfhe/preprocess/smote.hpp"
#include "fedfhe/preprocess/woe.hpp"
