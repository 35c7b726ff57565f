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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ipcfuzz/parcel.hpp"

namespace ipcfuzz {
namespace {

// Independent encoder: length prefix, raw bytes, zero padding to 4.
std::vector<uint8_t> hand_encode_string(const std::string& s) {
    std::vector<uint8_t> out;
    const uint32_t n = static_cast<uint32_t>(s.size());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(n >> (8 * i)));
    out.insert(out.end(), s.begin(), s.end());
    while (out.size() % 4 != 0) out.push_back(0);
    return out;
}

std::vector<uint8_t> bytes_of(const Parcel& p) {
    return {p.data().begin(), p.data().end()};
}

void expect_parcel_error(ParcelErrorKind kind, const std::function<void()>& fn) {
    try {
        fn();
        ADD_FAILURE() << "expected " << to_string(kind);
    } catch (const ParcelError& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

TEST(ParcelTest, EmptyStringIsFourZeroBytes) {
    Parcel p;
    p.writeString("");
    EXPECT_EQ(bytes_of(p), (std::vector<uint8_t>{0, 0, 0, 0}));
}

TEST(ParcelTest, BoolTrueIsLittleEndianOne) {
    Parcel p;
    p.writeBool(true);
    EXPECT_EQ(bytes_of(p), (std::vector<uint8_t>{1, 0, 0, 0}));
}

TEST(ParcelTest, StringMatchesHandEncoder) {
    for (const std::string& s : std::vector<std::string>{"abcde", "a", "abcd", "", "h\xc3\xa9llo",
                                                          std::string(1000, 'z')}) {
        Parcel p;
        p.writeString(s);
        EXPECT_EQ(bytes_of(p), hand_encode_string(s)) << s;
    }
    Parcel p;
    p.writeString("abcde");
    EXPECT_EQ(p.toHex(), "050000006162636465000000");
}

TEST(ParcelTest, FixedWidthEncodings) {
    Parcel p;
    p.writeInt32(42);
    p.writeInt64(-2);
    p.writeDouble(1.5);
    EXPECT_EQ(p.toHex(), "2a000000" "feffffffffffffff" "000000000000f83f");
}

TEST(ParcelTest, ReadI32AdvancesCursor) {
    Parcel p = Parcel::fromHex("2a000000");
    EXPECT_EQ(p.readInt32(), 42);
    EXPECT_EQ(p.position(), 4u);
}

TEST(ParcelTest, OversizedDeclaredLengthIsMalformed) {
    Parcel p = Parcel::fromHex("ffffff7f");
    expect_parcel_error(ParcelErrorKind::MalformedLength, [&] { p.readString(); });
    EXPECT_EQ(p.position(), 0u);
}

TEST(ParcelTest, NegativeDeclaredLengthIsMalformed) {
    Parcel p = Parcel::fromHex("feffffff");
    expect_parcel_error(ParcelErrorKind::MalformedLength, [&] { p.readBytes(); });
}

TEST(ParcelTest, ShortFixedReadIsTruncated) {
    Parcel p = Parcel::fromHex("0100");
    expect_parcel_error(ParcelErrorKind::Truncated, [&] { p.readInt32(); });
    Parcel q = Parcel::fromHex("01000000");
    expect_parcel_error(ParcelErrorKind::Truncated, [&] { q.readInt64(); });
}

TEST(ParcelTest, MissingPaddingIsTruncated) {
    // Declares one byte, carries it, but stops before the three pad bytes.
    Parcel p = Parcel::fromHex("0100000061");
    expect_parcel_error(ParcelErrorKind::Truncated, [&] { p.readString(); });
}

TEST(ParcelTest, InvalidUtf8IsBadEncoding) {
    Parcel p;
    p.writeString("\xff\xfe");
    expect_parcel_error(ParcelErrorKind::BadEncoding, [&] { p.readString(); });
    Parcel q;
    q.writeString("\xc3\xa9");
    EXPECT_EQ(q.readString(), "\xc3\xa9");
}

TEST(ParcelTest, KindMismatchOnWriteValue) {
    Parcel p;
    expect_parcel_error(ParcelErrorKind::KindMismatch,
                        [&] { p.writeValue(ValueKind::I64, Value{int32_t{1}}); });
}

TEST(ParcelTest, HandleSlotsRecordOffsets) {
    Parcel p;
    p.writeHandle(Handle{5});
    EXPECT_EQ(p.toHex(), "05000000");
    EXPECT_EQ(p.offsets(), (std::vector<uint32_t>{0}));
    p.writeHandle(Handle{6});
    EXPECT_EQ(p.offsets(), (std::vector<uint32_t>{0, 4}));

    Parcel q;
    q.writeInt64(1);
    q.writeHandle(Handle{3});
    EXPECT_EQ(q.offsets(), (std::vector<uint32_t>{8}));
}

TEST(ParcelTest, ReadHandleReportsSlotValidity) {
    Parcel valid = Parcel::fromHex("05000000", {0});
    HandleRead r = valid.readHandle();
    EXPECT_EQ(r.handle, Handle{5});
    EXPECT_TRUE(r.slotValid);
    EXPECT_EQ(valid.position(), 4u);

    Parcel tampered = Parcel::fromHex("05000000");
    r = tampered.readHandle();
    EXPECT_EQ(r.handle, Handle{5});
    EXPECT_FALSE(r.slotValid);
}

TEST(ParcelTest, NegativeHandleIsRefused) {
    Parcel p;
    EXPECT_THROW(p.writeHandle(Handle{-1}), std::invalid_argument);
}

TEST(ParcelTest, FromBytesValidatesOffsets) {
    EXPECT_THROW(Parcel::fromBytes({0, 0, 0, 0}, {2}), std::invalid_argument);
    EXPECT_THROW(Parcel::fromBytes({0, 0, 0, 0}, {4}), std::invalid_argument);
    EXPECT_THROW(Parcel::fromBytes(std::vector<uint8_t>(8), {4, 0}), std::invalid_argument);
    EXPECT_NO_THROW(Parcel::fromBytes(std::vector<uint8_t>(8), {0, 4}));
}

TEST(ParcelTest, CapacityLimitOnLengthPrefix) {
    EXPECT_EQ(detail::encode_length(0x7fffffff), 0x7fffffff);
    try {
        detail::encode_length(size_t{0x80000000});
        ADD_FAILURE();
    } catch (const ParcelError& e) {
        EXPECT_EQ(e.kind(), ParcelErrorKind::Capacity);
    }
}

TEST(ParcelTest, HexRoundTrip) {
    const std::vector<uint8_t> bytes = {0x00, 0x7f, 0x80, 0xff, 0x10};
    EXPECT_EQ(to_hex(bytes), "007f80ff10");
    EXPECT_EQ(from_hex("007F80ff10"), bytes);
    EXPECT_THROW(from_hex("abc"), std::invalid_argument);
    EXPECT_THROW(from_hex("zz"), std::invalid_argument);
}

TEST(ParcelTest, ReadDeterminism) {
    Parcel a = Parcel::fromHex("0300000061626300ffffffff");
    Parcel b = a;
    EXPECT_EQ(a.readString(), b.readString());
    ParcelErrorKind ka{}, kb{};
    try { a.readString(); } catch (const ParcelError& e) { ka = e.kind(); }
    try { b.readString(); } catch (const ParcelError& e) { kb = e.kind(); }
    EXPECT_EQ(ka, kb);
}

// Writes and reads back 1000 random tag sequences, checking the layout
// invariants after every write.
TEST(ParcelProperty, RandomRoundTrip) {
    std::mt19937_64 rng(20260101);
    auto pick = [&](uint64_t n) { return rng() % n; };
    for (int iter = 0; iter < 1000; ++iter) {
        Parcel p;
        std::vector<std::pair<int, Value>> written;  // kind index 0..6, 6 = handle
        const int count = static_cast<int>(pick(20));
        for (int i = 0; i < count; ++i) {
            const int k = static_cast<int>(pick(7));
            switch (k) {
                case 0: { int32_t v = static_cast<int32_t>(rng()); p.writeInt32(v); written.push_back({k, v}); break; }
                case 1: { int64_t v = static_cast<int64_t>(rng()); p.writeInt64(v); written.push_back({k, v}); break; }
                case 2: {
                    double v = std::ldexp(static_cast<double>(rng() % 1000000), static_cast<int>(pick(200)) - 100);
                    p.writeDouble(v);
                    written.push_back({k, v});
                    break;
                }
                case 3: { bool v = pick(2) == 1; p.writeBool(v); written.push_back({k, v}); break; }
                case 4: {
                    std::string s(pick(40), ' ');
                    for (auto& c : s) c = static_cast<char>('!' + pick(90));
                    p.writeString(s);
                    written.push_back({k, s});
                    break;
                }
                case 5: {
                    std::vector<uint8_t> b(pick(40));
                    for (auto& c : b) c = static_cast<uint8_t>(rng());
                    p.writeBytes(b);
                    written.push_back({k, b});
                    break;
                }
                case 6: {
                    int32_t h = static_cast<int32_t>(pick(1u << 31));
                    p.writeHandle(Handle{h});
                    written.push_back({k, h});
                    break;
                }
            }
            ASSERT_EQ(p.size() % 4, 0u);
            const auto& offs = p.offsets();
            for (size_t j = 0; j < offs.size(); ++j) {
                ASSERT_EQ(offs[j] % 4, 0u);
                ASSERT_LE(offs[j] + 4, p.size());
                if (j) ASSERT_LT(offs[j - 1], offs[j]);
            }
        }
        Parcel q = Parcel::fromBytes(bytes_of(p), p.offsets());
        for (const auto& [k, v] : written) {
            switch (k) {
                case 0: ASSERT_EQ(q.readInt32(), std::get<int32_t>(v)); break;
                case 1: ASSERT_EQ(q.readInt64(), std::get<int64_t>(v)); break;
                case 2: ASSERT_EQ(q.readDouble(), std::get<double>(v)); break;
                case 3: ASSERT_EQ(q.readBool(), std::get<bool>(v)); break;
                case 4: ASSERT_EQ(q.readString(), std::get<std::string>(v)); break;
                case 5: ASSERT_EQ(q.readBytes(), std::get<std::vector<uint8_t>>(v)); break;
                case 6: {
                    HandleRead r = q.readHandle();
                    ASSERT_EQ(r.handle.value, std::get<int32_t>(v));
                    ASSERT_TRUE(r.slotValid);
                    break;
                }
            }
            ASSERT_LE(q.position(), q.size());
        }
        ASSERT_EQ(q.remaining(), 0u);
    }
}

class RecordingObserver : public ParcelObserver {
public:
    void onRead(FieldKind kind, size_t begin, size_t end, std::string_view label) override {
        events.push_back(std::string(to_string(kind)) + "[" + std::to_string(begin) + "," +
                         std::to_string(end) + ")" + std::string(label));
    }
    void onScopeBegin(std::string_view label, size_t) override { events.push_back("{" + std::string(label)); }
    void onScopeEnd(size_t) override { events.push_back("}"); }
    std::vector<std::string> events;
};

TEST(ParcelTest, ObserverSeesReadsAndScopes) {
    Parcel p;
    p.writeInt32(1);
    p.writeString("ab");
    RecordingObserver obs;
    p.setObserver(&obs);
    {
        ParcelScope scope(p, "Outer");
        p.readInt32("n");
        p.readString("s");
    }
    EXPECT_EQ(obs.events, (std::vector<std::string>{"{Outer", "I32[0,4)n", "STRING[4,12)s", "}"}));
    Parcel copy = p;
    EXPECT_EQ(copy.observer(), nullptr);
}

TEST(ParcelTest, WriteLogMatchesLayout) {
    Parcel p;
    p.enableWriteLog();
    p.writeString("abcde");
    p.writeHandle(Handle{2});
    p.writeBool(false);
    const std::vector<WriteRecord> expected = {
            {FieldKind::String, 0, 12}, {FieldKind::Handle, 12, 16}, {FieldKind::Bool, 16, 20}};
    EXPECT_EQ(*p.writeLog(), expected);
}

}  // namespace
}  // namespace ipcfuzz
