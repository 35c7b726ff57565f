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

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ipcfuzz {

// Integer capability naming a registered service or exported object. 0 is
// the service manager.
struct Handle {
    int32_t value = 0;

    constexpr Handle() = default;
    constexpr explicit Handle(int32_t v) : value(v) {}
    auto operator<=>(const Handle&) const = default;
};

inline constexpr Handle kServiceManagerHandle{0};

// Wire kinds a reader can ask for. HANDLE and COMPOSITE only show up in
// traces; the parcel itself is untagged.
enum class FieldKind { I32, I64, F64, Bool, String, Bytes, Handle, Composite };

std::string_view to_string(FieldKind kind);
std::optional<FieldKind> field_kind_from_string(std::string_view name);

// Kinds accepted by write_value/read_value.
enum class ValueKind { I32, I64, F64, Bool, String, Bytes };

using Value = std::variant<int32_t, int64_t, double, bool, std::string, std::vector<uint8_t>>;

ValueKind kind_of(const Value& value);
FieldKind to_field_kind(ValueKind kind);

enum class ParcelErrorKind {
    Truncated,        // not enough bytes left for a fixed-width read or padding
    MalformedLength,  // negative declared length, or longer than what remains
    BadEncoding,      // STRING bytes are not valid UTF-8
    Capacity,         // payload longer than 2^31-1 bytes on write
    KindMismatch,     // value does not match the requested tag
};

std::string_view to_string(ParcelErrorKind kind);

class ParcelError : public std::runtime_error {
public:
    ParcelError(ParcelErrorKind kind, const std::string& what)
          : std::runtime_error(what), mKind(kind) {}

    ParcelErrorKind kind() const { return mKind; }

private:
    ParcelErrorKind mKind;
};

// Read-side instrumentation. Installed per dispatch by the recorder; the
// parcel reports every successful read and every composite scope.
class ParcelObserver {
public:
    virtual ~ParcelObserver() = default;
    virtual void onRead(FieldKind kind, size_t begin, size_t end, std::string_view label) = 0;
    virtual void onScopeBegin(std::string_view label, size_t position) = 0;
    virtual void onScopeEnd(size_t position) = 0;
};

// One entry of the writer-side encoding log.
struct WriteRecord {
    FieldKind kind;
    size_t begin;
    size_t end;

    bool operator==(const WriteRecord&) const = default;
};

struct HandleRead {
    Handle handle;
    bool slotValid;  // false when the position is missing from the offsets table
};

namespace detail {
// Validates a payload length for the I32 length prefix.
int32_t encode_length(size_t length);
bool is_valid_utf8(std::span<const uint8_t> bytes);
size_t padded(size_t length);
}  // namespace detail

// Untagged little-endian serialization buffer with a side table of
// handle-slot offsets. Writes always keep the buffer 4-byte aligned.
class Parcel {
public:
    Parcel() = default;
    Parcel(const Parcel& other);
    Parcel& operator=(const Parcel& other);
    Parcel(Parcel&& other) noexcept;
    Parcel& operator=(Parcel&& other) noexcept;
    ~Parcel() = default;

    // Adopts raw bytes (any length). Offsets must be strictly increasing,
    // 4-byte aligned and leave room for a 4-byte slot.
    static Parcel fromBytes(std::vector<uint8_t> data, std::vector<uint32_t> offsets = {});
    static Parcel fromHex(std::string_view hex, std::vector<uint32_t> offsets = {});

    void writeValue(ValueKind kind, const Value& value);
    void writeValue(const Value& value) { writeValue(kind_of(value), value); }
    void writeInt32(int32_t v);
    void writeInt64(int64_t v);
    void writeDouble(double v);
    void writeBool(bool v);
    void writeString(std::string_view s);
    void writeBytes(std::span<const uint8_t> bytes);
    void writeHandle(Handle h);

    Value readValue(ValueKind kind, std::string_view label = {});
    int32_t readInt32(std::string_view label = {});
    int64_t readInt64(std::string_view label = {});
    double readDouble(std::string_view label = {});
    bool readBool(std::string_view label = {});
    std::string readString(std::string_view label = {});
    std::vector<uint8_t> readBytes(std::string_view label = {});
    HandleRead readHandle(std::string_view label = {});

    // Overwrites an already written 4-byte slot; used for handle patching.
    void patchInt32(size_t position, int32_t v);

    std::span<const uint8_t> data() const { return mData; }
    const std::vector<uint32_t>& offsets() const { return mOffsets; }
    size_t size() const { return mData.size(); }
    size_t position() const { return mPosition; }
    size_t remaining() const { return mData.size() - mPosition; }
    void setPosition(size_t position);

    std::string toHex() const;

    void setObserver(ParcelObserver* observer) { mObserver = observer; }
    ParcelObserver* observer() const { return mObserver; }

    void enableWriteLog() { mWriteLog.emplace(); }
    const std::optional<std::vector<WriteRecord>>& writeLog() const { return mWriteLog; }

    // Equal buffers and offsets; the cursor and instrumentation are ignored.
    friend bool operator==(const Parcel& a, const Parcel& b) {
        return a.mData == b.mData && a.mOffsets == b.mOffsets;
    }

private:
    friend class ParcelScope;

    void appendRaw(const void* bytes, size_t n);
    void pad();
    void logWrite(FieldKind kind, size_t begin);
    void noteRead(FieldKind kind, size_t begin, std::string_view label);
    void require(size_t n, const char* what) const;
    std::vector<uint8_t> readLengthPrefixed(FieldKind kind, std::string_view label);

    std::vector<uint8_t> mData;
    std::vector<uint32_t> mOffsets;
    size_t mPosition = 0;
    std::optional<std::vector<WriteRecord>> mWriteLog;
    ParcelObserver* mObserver = nullptr;
};

// Labels a composite decode (Intent, Bundle, ...) for the trace recorder.
// A no-op when no observer is installed.
class ParcelScope {
public:
    ParcelScope(Parcel& parcel, std::string_view label);
    ~ParcelScope();
    ParcelScope(const ParcelScope&) = delete;
    ParcelScope& operator=(const ParcelScope&) = delete;

private:
    Parcel& mParcel;
    ParcelObserver* mObserver;
};

std::string to_hex(std::span<const uint8_t> bytes);
// Lowercase or uppercase hex, even length, no separators.
std::vector<uint8_t> from_hex(std::string_view hex);

}  // namespace ipcfuzz
