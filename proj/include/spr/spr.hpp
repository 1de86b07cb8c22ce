#pragma once

#include "spr/config.hpp"
#include "spr/error.hpp"
#include "spr/io.hpp"
#include "spr/labels.hpp"
#include "spr/losses.hpp"
#include "spr/pixelalign.hpp"
#include "spr/prototypes.hpp"
#include "spr/structure.hpp"
#include "spr/tensor.hpp"
#include "spr/toy/classifier.hpp"
#include "spr/toy/dataset.hpp"
#include "spr/toy/gradcheck.hpp"
#include "spr/toy/metrics.hpp"
#include "spr/toy/trace.hpp"
#include "spr/toy/train.hpp"
