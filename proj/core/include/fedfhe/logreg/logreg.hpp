#pragma once

#include "fedfhe/logreg/federated.hpp"
#include "fedfhe/logreg/gradient.hpp"
#include "fedfhe/logreg/model.hpp"
#include "fedfhe/logreg/sigmoid.hpp"
