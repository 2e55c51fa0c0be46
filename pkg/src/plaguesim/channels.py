"""Transmission channel kinds shared across modules."""

from enum import Enum


class ChannelKind(str, Enum):
    PROXIMITY = "proximity"
    ZONE_CHAT = "zone_chat"
    GLOBAL_CHAT = "global_chat"
    DIRECT_MESSAGE = "direct_message"
    PET_VECTOR = "pet_vector"


# Canonical order; contact composition and attribution iterate channels in
# this order, which pins the run-level RNG consumption order.
CHANNEL_ORDER = (
    ChannelKind.PROXIMITY,
    ChannelKind.ZONE_CHAT,
    ChannelKind.GLOBAL_CHAT,
    ChannelKind.DIRECT_MESSAGE,
    ChannelKind.PET_VECTOR,
)

CHANNEL_NAMES = tuple(c.value for c in CHANNEL_ORDER)
