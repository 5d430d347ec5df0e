"""
Admin para corridas de experimentos
"""

from django.contrib import admin
from django.utils.html import format_html

from .models import ExperimentRun, TrialResult


class TrialResultInline(admin.TabularInline):
    model = TrialResult
    extra = 0
    can_delete = False
    fields = ["ceiling", "trial", "algorithm", "order", "alg_pairs", "opt_pairs", "ratio"]
    readonly_fields = fields
    show_change_link = False

    def has_add_permission(self, request, obj=None):
        return False


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ["id", "kind", "base_seed", "status_badge", "parallel", "trial_count", "created_at"]
    list_filter = ["kind", "status", "parallel"]
    search_fields = ["base_seed"]
    readonly_fields = ["created_at"]
    inlines = [TrialResultInline]

    fieldsets = (
        ("Corrida", {"fields": ("kind", "base_seed", "status", "parallel", "created_at")}),
        ("Parámetros", {"fields": ("parameters",)}),
        ("Salida", {"fields": ("csv_output",), "classes": ("collapse",)}),
    )

    def status_badge(self, obj):
        color = "#28a745" if obj.status == "success" else "#dc3545"
        return format_html(
            '<span style="color: {}; font-weight: bold;">{}</span>',
            color,
            obj.get_status_display(),
        )

    status_badge.short_description = "Estado"

    def trial_count(self, obj):
        return obj.trials.count()

    trial_count.short_description = "Resultados"


@admin.register(TrialResult)
class TrialResultAdmin(admin.ModelAdmin):
    list_display = [
        "run",
        "ceiling",
        "trial",
        "algorithm",
        "order",
        "alg_pairs",
        "opt_pairs",
        "ratio",
        "is_infinite",
        "skipped",
    ]
    list_filter = ["algorithm", "order", "is_infinite", "skipped", "run__kind"]
    search_fields = ["seed"]
    list_select_related = ["run"]
