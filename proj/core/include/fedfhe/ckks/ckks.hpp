#pragma once

#include "fedfhe/ckks/context.hpp"
#include "fedfhe/ckks/encoder.hpp"
#include "fedfhe/ckks/encryptor.hpp"
#include "fedfhe/ckks/evaluator.hpp"
#include "fedfhe/ckks/keys.hpp"
#include "fedfhe/ckks/params.hpp"
#include "fedfhe/ckks/serialize.hpp"
#include "fedfhe/ckks/types.hpp"
