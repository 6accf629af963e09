"""Canonical sidecar tag names.

Wire spellings follow EXIF/IPTC/XMP conventions. Bump ``TAG_TABLE_VERSION``
whenever a spelling changes; serialized corpora are only comparable within
one version.
"""

TAG_TABLE_VERSION = 1

ID = "id"

# spatial
GPS_LATITUDE = "GPSLatitude"
GPS_LONGITUDE = "GPSLongitude"
GPS_SATELLITES = "GPSSatellites"
CITY = "City"
COUNTRY = "Country"
STATE = "State"
LOCATION = "Location"

# temporal
DATETIME_ORIGINAL = "DateTimeOriginal"
DATETIME_DIGITIZED = "DateTimeDigitized"
OFFSET_TIME_ORIGINAL = "OffsetTimeOriginal"
OFFSET_TIME_DIGITIZED = "OffsetTimeDigitized"
GPS_TIMESTAMP = "GPSTimeStamp"
GPS_DATESTAMP = "GPSDateStamp"
TIMEZONE_OFFSET = "TimeZoneOffset"

# contextual
TITLE = "Title"
CAPTION = "Caption"
CONTENT_DESCRIPTION = "ContentDescription"
HEADLINE = "Headline"
IMAGE_DESCRIPTION = "ImageDescription"
INSTRUCTIONS = "Instructions"
WEATHER_PROFILE = "WeatherProfile"
KEYWORDS = "Keywords"
SEMANTIC_NAMES = "SemanticNames"

# intrinsic
RESOLUTION = "Resolution"
WHITE_BALANCE = "WhiteBalance"
SUBJECT_DISTANCE = "SubjectDistance"
CAMERA_ELEVATION_ANGLE = "CameraElevationAngle"
SHUTTER_SPEED = "ShutterSpeedValue"
EXPOSURE_TIME = "ExposureTime"
COVERAGE = "Coverage"

SPATIAL_TAGS = (GPS_LATITUDE, GPS_LONGITUDE, GPS_SATELLITES, CITY, COUNTRY, STATE, LOCATION)
TEMPORAL_TAGS = (
    DATETIME_ORIGINAL,
    DATETIME_DIGITIZED,
    OFFSET_TIME_ORIGINAL,
    OFFSET_TIME_DIGITIZED,
    GPS_TIMESTAMP,
    GPS_DATESTAMP,
    TIMEZONE_OFFSET,
)
CONTEXT_TEXT_TAGS = (
    TITLE,
    CAPTION,
    CONTENT_DESCRIPTION,
    HEADLINE,
    IMAGE_DESCRIPTION,
    INSTRUCTIONS,
    WEATHER_PROFILE,
)
CONTEXT_LIST_TAGS = (KEYWORDS, SEMANTIC_NAMES)
INTRINSIC_TAGS = (
    RESOLUTION,
    WHITE_BALANCE,
    SUBJECT_DISTANCE,
    CAMERA_ELEVATION_ANGLE,
    SHUTTER_SPEED,
    EXPOSURE_TIME,
    COVERAGE,
)

KNOWN_TAGS = frozenset(
    (ID,) + SPATIAL_TAGS + TEMPORAL_TAGS + CONTEXT_TEXT_TAGS + CONTEXT_LIST_TAGS + INTRINSIC_TAGS
)

# separator for list-valued tags (Keywords, SemanticNames)
LIST_SEPARATOR = ";"
