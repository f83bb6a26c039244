#pragma once

#include "fedfhe/secureboost/encrypted_hist.hpp"
#include "fedfhe/secureboost/inference.hpp"
#include "fedfhe/secureboost/model.hpp"
#include "fedfhe/secureboost/train.hpp"
#include "fedfhe/secureboost/xgboost.hpp"
