//  Copyright 2026 The epochsketch Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#pragma once

#include "epochsketch/byte_io.hpp"
#include "epochsketch/config.hpp"
#include "epochsketch/dual_pyramid.hpp"
#include "epochsketch/engine.hpp"
#include "epochsketch/error.hpp"
#include "epochsketch/eval.hpp"
#include "epochsketch/generators.hpp"
#include "epochsketch/hash.hpp"
#include "epochsketch/ingest.hpp"
#include "epochsketch/item_pyramid.hpp"
#include "epochsketch/ngram.hpp"
#include "epochsketch/oracle.hpp"
#include "epochsketch/protocol.hpp"
#include "epochsketch/server.hpp"
#include "epochsketch/sketch.hpp"
#include "epochsketch/time_pyramid.hpp"
