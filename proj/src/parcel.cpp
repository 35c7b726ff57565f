/*
 * Copyright (C) 2026 The ipcfuzz Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ipcfuzz/parcel.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>

namespace ipcfuzz {

namespace {

constexpr size_t kAlignment = 4;

template <typename T>
T load_le(const uint8_t* p) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

std::string describe(const char* what, size_t need, size_t have) {
    return std::string(what) + ": need " + std::to_string(need) + " bytes, " +
            std::to_string(have) + " remaining";
}

}  // namespace

std::string_view to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::I32: return "I32";
        case FieldKind::I64: return "I64";
        case FieldKind::F64: return "F64";
        case FieldKind::Bool: return "BOOL";
        case FieldKind::String: return "STRING";
        case FieldKind::Bytes: return "BYTES";
        case FieldKind::Handle: return "HANDLE";
        case FieldKind::Composite: return "COMPOSITE";
    }
    return "?";
}

std::optional<FieldKind> field_kind_from_string(std::string_view name) {
    for (auto k : {FieldKind::I32, FieldKind::I64, FieldKind::F64, FieldKind::Bool,
                   FieldKind::String, FieldKind::Bytes, FieldKind::Handle,
                   FieldKind::Composite}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::string_view to_string(ParcelErrorKind kind) {
    switch (kind) {
        case ParcelErrorKind::Truncated: return "truncated";
        case ParcelErrorKind::MalformedLength: return "malformed-length";
        case ParcelErrorKind::BadEncoding: return "bad-encoding";
        case ParcelErrorKind::Capacity: return "capacity";
        case ParcelErrorKind::KindMismatch: return "kind-mismatch";
    }
    return "?";
}

ValueKind kind_of(const Value& value) {
    switch (value.index()) {
        case 0: return ValueKind::I32;
        case 1: return ValueKind::I64;
        case 2: return ValueKind::F64;
        case 3: return ValueKind::Bool;
        case 4: return ValueKind::String;
        default: return ValueKind::Bytes;
    }
}

FieldKind to_field_kind(ValueKind kind) {
    switch (kind) {
        case ValueKind::I32: return FieldKind::I32;
        case ValueKind::I64: return FieldKind::I64;
        case ValueKind::F64: return FieldKind::F64;
        case ValueKind::Bool: return FieldKind::Bool;
        case ValueKind::String: return FieldKind::String;
        case ValueKind::Bytes: return FieldKind::Bytes;
    }
    return FieldKind::Bytes;
}

namespace detail {

int32_t encode_length(size_t length) {
    if (length > static_cast<size_t>(std::numeric_limits<int32_t>::max())) {
        throw ParcelError(ParcelErrorKind::Capacity,
                          "payload of " + std::to_string(length) + " bytes exceeds 2^31-1");
    }
    return static_cast<int32_t>(length);
}

size_t padded(size_t length) {
    return (length + kAlignment - 1) & ~(kAlignment - 1);
}

bool is_valid_utf8(std::span<const uint8_t> bytes) {
    size_t i = 0;
    const size_t n = bytes.size();
    while (i < n) {
        const uint8_t c = bytes[i];
        if (c < 0x80) {
            ++i;
            continue;
        }
        size_t extra;
        uint32_t cp;
        if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= n) return false;
        for (size_t k = 1; k <= extra; ++k) {
            const uint8_t cc = bytes[i + k];
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Overlong forms, UTF-16 surrogates, and values past U+10FFFF.
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
            (extra == 3 && cp < 0x10000) || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        i += extra + 1;
    }
    return true;
}

}  // namespace detail

Parcel::Parcel(const Parcel& other)
      : mData(other.mData),
        mOffsets(other.mOffsets),
        mPosition(other.mPosition),
        mWriteLog(other.mWriteLog) {}

Parcel& Parcel::operator=(const Parcel& other) {
    if (this != &other) {
        mData = other.mData;
        mOffsets = other.mOffsets;
        mPosition = other.mPosition;
        mWriteLog = other.mWriteLog;
        mObserver = nullptr;
    }
    return *this;
}

Parcel::Parcel(Parcel&& other) noexcept
      : mData(std::move(other.mData)),
        mOffsets(std::move(other.mOffsets)),
        mPosition(other.mPosition),
        mWriteLog(std::move(other.mWriteLog)) {
    other.mPosition = 0;
}

Parcel& Parcel::operator=(Parcel&& other) noexcept {
    if (this != &other) {
        mData = std::move(other.mData);
        mOffsets = std::move(other.mOffsets);
        mPosition = other.mPosition;
        mWriteLog = std::move(other.mWriteLog);
        mObserver = nullptr;
        other.mPosition = 0;
    }
    return *this;
}

Parcel Parcel::fromBytes(std::vector<uint8_t> data, std::vector<uint32_t> offsets) {
    for (size_t i = 0; i < offsets.size(); ++i) {
        const uint32_t off = offsets[i];
        if (off % kAlignment != 0 || static_cast<size_t>(off) + 4 > data.size() ||
            (i > 0 && off <= offsets[i - 1])) {
            throw std::invalid_argument("invalid handle offset " + std::to_string(off));
        }
    }
    Parcel p;
    p.mData = std::move(data);
    p.mOffsets = std::move(offsets);
    return p;
}

Parcel Parcel::fromHex(std::string_view hex, std::vector<uint32_t> offsets) {
    return fromBytes(from_hex(hex), std::move(offsets));
}

void Parcel::appendRaw(const void* bytes, size_t n) {
    const auto* p = static_cast<const uint8_t*>(bytes);
    mData.insert(mData.end(), p, p + n);
}

void Parcel::pad() {
    mData.resize(detail::padded(mData.size()), 0);
}

void Parcel::logWrite(FieldKind kind, size_t begin) {
    if (mWriteLog) mWriteLog->push_back({kind, begin, mData.size()});
}

void Parcel::writeValue(ValueKind kind, const Value& value) {
    if (kind_of(value) != kind) {
        throw ParcelError(ParcelErrorKind::KindMismatch, "value does not match tag");
    }
    switch (kind) {
        case ValueKind::I32: writeInt32(std::get<int32_t>(value)); break;
        case ValueKind::I64: writeInt64(std::get<int64_t>(value)); break;
        case ValueKind::F64: writeDouble(std::get<double>(value)); break;
        case ValueKind::Bool: writeBool(std::get<bool>(value)); break;
        case ValueKind::String: writeString(std::get<std::string>(value)); break;
        case ValueKind::Bytes: writeBytes(std::get<std::vector<uint8_t>>(value)); break;
    }
}

void Parcel::writeInt32(int32_t v) {
    const size_t begin = mData.size();
    appendRaw(&v, sizeof(v));
    logWrite(FieldKind::I32, begin);
}

void Parcel::writeInt64(int64_t v) {
    const size_t begin = mData.size();
    appendRaw(&v, sizeof(v));
    logWrite(FieldKind::I64, begin);
}

void Parcel::writeDouble(double v) {
    const size_t begin = mData.size();
    appendRaw(&v, sizeof(v));
    logWrite(FieldKind::F64, begin);
}

void Parcel::writeBool(bool v) {
    const size_t begin = mData.size();
    const int32_t encoded = v ? 1 : 0;
    appendRaw(&encoded, sizeof(encoded));
    logWrite(FieldKind::Bool, begin);
}

void Parcel::writeString(std::string_view s) {
    const int32_t length = detail::encode_length(s.size());
    const size_t begin = mData.size();
    appendRaw(&length, sizeof(length));
    appendRaw(s.data(), s.size());
    pad();
    logWrite(FieldKind::String, begin);
}

void Parcel::writeBytes(std::span<const uint8_t> bytes) {
    const int32_t length = detail::encode_length(bytes.size());
    const size_t begin = mData.size();
    appendRaw(&length, sizeof(length));
    appendRaw(bytes.data(), bytes.size());
    pad();
    logWrite(FieldKind::Bytes, begin);
}

void Parcel::writeHandle(Handle h) {
    if (h.value < 0) throw std::invalid_argument("negative handle");
    const size_t begin = mData.size();
    mOffsets.push_back(static_cast<uint32_t>(begin));
    appendRaw(&h.value, sizeof(h.value));
    logWrite(FieldKind::Handle, begin);
}

void Parcel::patchInt32(size_t position, int32_t v) {
    if (position + 4 > mData.size()) throw std::out_of_range("patch past end of parcel");
    std::memcpy(mData.data() + position, &v, sizeof(v));
}

void Parcel::setPosition(size_t position) {
    if (position > mData.size()) throw std::out_of_range("cursor past end of parcel");
    mPosition = position;
}

void Parcel::require(size_t n, const char* what) const {
    if (n > remaining()) {
        throw ParcelError(ParcelErrorKind::Truncated, describe(what, n, remaining()));
    }
}

void Parcel::noteRead(FieldKind kind, size_t begin, std::string_view label) {
    if (mObserver) mObserver->onRead(kind, begin, mPosition, label);
}

Value Parcel::readValue(ValueKind kind, std::string_view label) {
    switch (kind) {
        case ValueKind::I32: return readInt32(label);
        case ValueKind::I64: return readInt64(label);
        case ValueKind::F64: return readDouble(label);
        case ValueKind::Bool: return readBool(label);
        case ValueKind::String: return readString(label);
        case ValueKind::Bytes: return readBytes(label);
    }
    throw ParcelError(ParcelErrorKind::KindMismatch, "unknown value kind");
}

int32_t Parcel::readInt32(std::string_view label) {
    require(4, "I32");
    const size_t begin = mPosition;
    const auto v = load_le<int32_t>(mData.data() + mPosition);
    mPosition += 4;
    noteRead(FieldKind::I32, begin, label);
    return v;
}

int64_t Parcel::readInt64(std::string_view label) {
    require(8, "I64");
    const size_t begin = mPosition;
    const auto v = load_le<int64_t>(mData.data() + mPosition);
    mPosition += 8;
    noteRead(FieldKind::I64, begin, label);
    return v;
}

double Parcel::readDouble(std::string_view label) {
    require(8, "F64");
    const size_t begin = mPosition;
    const auto v = load_le<double>(mData.data() + mPosition);
    mPosition += 8;
    noteRead(FieldKind::F64, begin, label);
    return v;
}

bool Parcel::readBool(std::string_view label) {
    require(4, "BOOL");
    const size_t begin = mPosition;
    const auto v = load_le<int32_t>(mData.data() + mPosition);
    mPosition += 4;
    noteRead(FieldKind::Bool, begin, label);
    return v != 0;
}

std::vector<uint8_t> Parcel::readLengthPrefixed(FieldKind kind, std::string_view label) {
    const char* what = kind == FieldKind::String ? "STRING length" : "BYTES length";
    require(4, what);
    const size_t begin = mPosition;
    const auto declared = load_le<int32_t>(mData.data() + mPosition);
    const size_t available = remaining() - 4;
    if (declared < 0 || static_cast<size_t>(declared) > available) {
        throw ParcelError(ParcelErrorKind::MalformedLength,
                          "declared length " + std::to_string(declared) + " with " +
                                  std::to_string(available) + " bytes remaining");
    }
    const size_t length = static_cast<size_t>(declared);
    const size_t span = detail::padded(length);
    if (span > available) {
        throw ParcelError(ParcelErrorKind::Truncated, describe("padding", span, available));
    }
    const uint8_t* start = mData.data() + mPosition + 4;
    std::vector<uint8_t> out(start, start + length);
    if (kind == FieldKind::String && !detail::is_valid_utf8(out)) {
        throw ParcelError(ParcelErrorKind::BadEncoding, "STRING is not valid UTF-8");
    }
    mPosition += 4 + span;
    noteRead(kind, begin, label);
    return out;
}

std::string Parcel::readString(std::string_view label) {
    auto bytes = readLengthPrefixed(FieldKind::String, label);
    return std::string(bytes.begin(), bytes.end());
}

std::vector<uint8_t> Parcel::readBytes(std::string_view label) {
    return readLengthPrefixed(FieldKind::Bytes, label);
}

HandleRead Parcel::readHandle(std::string_view label) {
    require(4, "HANDLE");
    const size_t begin = mPosition;
    const auto v = load_le<int32_t>(mData.data() + mPosition);
    mPosition += 4;
    const bool listed = std::binary_search(mOffsets.begin(), mOffsets.end(),
                                           static_cast<uint32_t>(begin));
    noteRead(FieldKind::Handle, begin, label);
    return {Handle{v}, listed};
}

std::string Parcel::toHex() const {
    return to_hex(mData);
}

ParcelScope::ParcelScope(Parcel& parcel, std::string_view label)
      : mParcel(parcel), mObserver(parcel.mObserver) {
    if (mObserver) mObserver->onScopeBegin(label, parcel.position());
}

ParcelScope::~ParcelScope() {
    if (mObserver) mObserver->onScopeEnd(mParcel.position());
}

std::string to_hex(std::span<const uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xF]);
    }
    return out;
}

std::vector<uint8_t> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
    auto nibble = [](char c) -> uint8_t {
        if (c >= '0' && c <= '9') return static_cast<uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<uint8_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<uint8_t>(c - 'A' + 10);
        throw std::invalid_argument(std::string("bad hex digit '") + c + "'");
    };
    std::vector<uint8_t> out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    }
    return out;
}

}  // namespace ipcfuzz
